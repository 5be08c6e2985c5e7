import json

from iad.bench import bench_scaling
from iad.datagen import SyntheticSpec


def test_smoke_grid():
    r = bench_scaling([10], [1000], SyntheticSpec(), repeats=1)
    assert r.rows[0][:2] == (10, 1000) and r.rows[0][2] > 0
    assert r.environment["parallelism"] == 1


def test_grid_shape_and_serialization():
    r = bench_scaling([1, 3], [200, 400], SyntheticSpec(ticks=150), repeats=1)
    assert [(v, t) for v, t, _ in r.rows] == [(1, 200), (3, 200), (1, 400), (3, 400)]
    assert all(s > 0 for _, _, s in r.rows)
    lines = r.to_csv().splitlines()
    assert lines[0] == "num_vms,num_ticks,seconds" and len(lines) == 5
    doc = json.loads(json.dumps(r.to_dict()))
    assert doc["rows"][3]["num_vms"] == 3
    assert r.seconds(3, 400) == r.rows[3][2]
