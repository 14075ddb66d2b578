import pytest

from fairplai import errors
from fairplai.store import Store, default_store


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "s")


DOC = {"schema": [], "rows": [[1, "a", 0]], "label": "y", "protected": ["g"]}


def test_dataset_put_get_idempotent(store):
    a = store.put_dataset(DOC)
    b = store.put_dataset(DOC)
    assert a == b and len(a) == 64
    assert store.get_dataset(a) == DOC
    assert store.exists("datasets", a)
    assert store.list("datasets") == [a]


def test_unknown_ids(store):
    with pytest.raises(errors.UnknownDataset):
        store.get_dataset("0" * 64)
    with pytest.raises(errors.UnknownFrontier):
        store.get_frontier_doc("0" * 64)
    with pytest.raises(errors.MissingArtifact):
        store.get_model("0" * 64)


def test_tampered_file_detected(store, tmp_path):
    digest = store.put_dataset(DOC)
    path = next((tmp_path / "s" / "datasets").iterdir())
    path.write_bytes(path.read_bytes().replace(b'"a"', b'"b"'))
    with pytest.raises(errors.CorruptFile):
        store.get_dataset(digest)


def test_contracts_append_only(store):
    doc = {"format": "contract-v1", "chosen_id": None}
    cid = store.put_contract(doc)
    assert store.get_contract(cid) == doc
    with pytest.raises(errors.FairplaiError):
        store.put_contract(doc)


def test_default_store_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FAIRPLAI_STORE", str(tmp_path / "env-store"))
    s = default_store()
    s.put_dataset(DOC)
    assert (tmp_path / "env-store" / "datasets").exists()
