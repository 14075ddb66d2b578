"""Content-addressed artifact store.

Datasets, frontiers, trained models and selection contracts are written
under a single root directory, keyed by the sha256 digest of their
canonical JSON encoding. Writes go to a temp file first and are renamed
into place, so a crashed run never leaves a half-written artifact.
Contracts are append-only: an id can be written once and never replaced.
"""

import os
import tempfile

from . import errors
from .canonical import canonical_bytes, canonical_loads, digest_of

_KINDS = ("datasets", "frontiers", "models", "contracts")


class Store:
    def __init__(self, root):
        self.root = str(root)
        for kind in _KINDS:
            os.makedirs(os.path.join(self.root, kind), exist_ok=True)

    def _path(self, kind, digest):
        return os.path.join(self.root, kind, digest + ".json")

    def _write(self, kind, doc, digest=None):
        digest = digest or digest_of(doc)
        path = self._path(kind, digest)
        if os.path.exists(path):
            return digest
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(canonical_bytes(doc))
            os.rename(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return digest

    def _read(self, kind, digest, missing_exc):
        path = self._path(kind, digest)
        if not os.path.exists(path):
            raise missing_exc(digest)
        try:
            with open(path, "rb") as fh:
                doc = canonical_loads(fh.read())
        except ValueError as exc:
            raise errors.CorruptFile(path) from exc
        if digest_of(doc) != digest:
            raise errors.CorruptFile(f"{path}: content does not match its id")
        return doc

    def exists(self, kind, digest) -> bool:
        return os.path.exists(self._path(kind, digest))

    def list(self, kind):
        names = os.listdir(os.path.join(self.root, kind))
        return sorted(n[:-5] for n in names if n.endswith(".json"))

    # datasets -------------------------------------------------------------

    def put_dataset(self, doc: dict) -> str:
        return self._write("datasets", doc)

    def get_dataset(self, digest: str) -> dict:
        return self._read("datasets", digest, errors.UnknownDataset)

    # frontiers ------------------------------------------------------------

    def put_frontier(self, frontier) -> str:
        doc = frontier.to_dict()
        return self._write("frontiers", doc)

    def get_frontier_doc(self, digest: str) -> dict:
        return self._read("frontiers", digest, errors.UnknownFrontier)

    # models ---------------------------------------------------------------

    def put_model(self, artifact: dict) -> str:
        return self._write("models", artifact)

    def get_model(self, digest: str) -> dict:
        return self._read("models", digest, errors.MissingArtifact)

    # contracts (append-only) ----------------------------------------------

    def put_contract(self, doc: dict) -> str:
        digest = digest_of(doc)
        path = self._path("contracts", digest)
        if os.path.exists(path):
            raise errors.FairplaiError(f"contract {digest} already issued")
        return self._write("contracts", doc, digest=digest)

    def get_contract(self, digest: str) -> dict:
        return self._read("contracts", digest, errors.MissingArtifact)


def default_store() -> Store:
    root = os.environ.get("FAIRPLAI_STORE", os.path.join(os.getcwd(), ".fairplai"))
    return Store(root)
