import numpy as np

from icdisp import rng


def test_chunks_are_reproducible_and_distinct():
    a = rng.normals(rng.chunk_generator(7, rng.STREAM_SPHERE, 3), 5)
    b = rng.normals(rng.chunk_generator(7, rng.STREAM_SPHERE, 3), 5)
    c = rng.normals(rng.chunk_generator(7, rng.STREAM_SPHERE, 4), 5)
    d = rng.normals(rng.chunk_generator(7, rng.STREAM_MISC, 3), 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_open_uniforms_stay_inside_unit_interval():
    u = rng.open_uniforms(rng.chunk_generator(0, 1, 0), 100_000)
    assert u.min() > 0 and u.max() < 1


def test_chunk_spans_cover_range():
    spans = list(rng.chunk_spans(1000, 3100))
    assert spans[0] == (0, 1000, 1024)
    assert sum(hi - lo for _, lo, hi in spans) == 2100
    assert spans[-1][0] == 3


def test_map_chunks_order_independent_of_threads():
    fn = lambda c, lo, hi: (c, lo, hi)  # noqa: E731
    assert rng.map_chunks(fn, 5, 9000, 1) == rng.map_chunks(fn, 5, 9000, 4)


def test_thread_count_falls_back_to_environment(monkeypatch):
    monkeypatch.setenv("ICDISP_THREADS", "3")
    assert rng.resolve_threads(None) == 3
    assert rng.resolve_threads(2) == 2
    monkeypatch.delenv("ICDISP_THREADS")
    assert rng.resolve_threads(None) == 1
