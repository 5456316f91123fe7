import json

from nni_validity.cache import CACHE_ENV, ResultCache, canonical_json, key_digest


def test_canonical_json_ignores_key_order():
    assert canonical_json({"b": 1, "a": [1, 2]}) == canonical_json({"a": [1, 2], "b": 1})
    assert key_digest({"x": 1, "y": 2}) == key_digest({"y": 2, "x": 1})
    assert key_digest({"x": 1}) != key_digest({"x": 1}, tool_version="9.9")


def test_round_trip_and_counters(tmp_path):
    cache = ResultCache(tmp_path)
    key = {"n": 10, "eps": 0.01}
    assert cache.get(key) is None
    cache.put(key, {"alpha_c": 9.4})
    assert cache.get({"eps": 0.01, "n": 10}) == {"alpha_c": 9.4}
    assert (cache.hits, cache.misses) == (1, 1)
    assert not list(tmp_path.glob(".tmp-*"))


def test_version_and_key_mismatch_miss(tmp_path):
    key = {"n": 3}
    ResultCache(tmp_path).put(key, 1)
    assert ResultCache(tmp_path, tool_version="other").get(key) is None
    path = ResultCache(tmp_path).path_for(key)
    record = json.loads(path.read_text())
    record["key"] = {"n": 4}
    path.write_text(json.dumps(record))
    assert ResultCache(tmp_path).get(key) is None


def test_corrupt_file_is_a_miss(tmp_path):
    cache = ResultCache(tmp_path)
    cache.path_for({"n": 1}).write_text("{not json")
    assert cache.get({"n": 1}) is None


def test_from_env(tmp_path, monkeypatch):
    monkeypatch.delenv(CACHE_ENV, raising=False)
    assert ResultCache.from_env() is None
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "c"))
    assert ResultCache.from_env().root == tmp_path / "c"
    assert ResultCache.from_env(tmp_path / "d").root == tmp_path / "d"
