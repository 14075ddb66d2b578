"""HTTP service exposing ingestion, frontier jobs, translation, selection
and contracts over a versioned JSON API.

Stateless by design: every artifact is content-addressed in the store and
responses carry digests, so a client can always detect staleness. Frontier
builds run on a background thread pool with per-job progress tracking.
"""

import itertools
import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse

from . import errors, policy
from .config import DEFAULT_CONFIG, TrainingConfig
from .dataset import dataset_from_doc, dataset_to_doc, load_csv, load_schema_file
from .frontier import (Frontier, GridSpec, build_frontier, dataset_digest,
                       export_csv, pareto_filter)
from .store import Store, default_store

MEDIA_TYPE = "application/vnd.fairplai.v1+json"


def _jsonable(obj):
    """Strict-JSON view of a document: non-finite floats become the same
    string sentinels the canonical encoding uses."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        if math.isnan(obj):
            return "NaN"
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


class ApiResponse(JSONResponse):
    media_type = MEDIA_TYPE

    def render(self, content) -> bytes:
        return json.dumps(_jsonable(content), ensure_ascii=False,
                          separators=(",", ":")).encode("utf-8")


@dataclass
class FrontierJob:
    id: str
    status: str = "queued"          # queued -> running -> done | failed
    cells_done: int = 0
    cells_total: int = 0
    result: str | None = None       # frontier digest
    error: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "status": self.status,
                "progress": {"done": self.cells_done, "total": self.cells_total},
                "result": self.result, "error": self.error}


_HTTP_STATUS = {
    errors.UnknownDataset: 404, errors.UnknownJob: 404,
    errors.UnknownFrontier: 404, errors.MissingArtifact: 404,
    errors.UnrecognizedIntent: 422, errors.ConflictingDescriptors: 422,
    errors.MissingCriterion: 422, errors.DeltaOutOfRange: 422,
    errors.EmptyAttributeList: 422, errors.AttributeMismatch: 422,
    errors.InvalidGrid: 422, errors.InfeasibleChoice: 409,
    errors.StaleFrontier: 409,
}


def create_app(store: Store | None = None, max_workers: int | None = None) -> FastAPI:
    store = store if store is not None else default_store()
    app = FastAPI(title="fairplai", version="1")
    jobs: dict[str, FrontierJob] = {}
    jobs_lock = threading.Lock()
    job_seq = itertools.count(1)
    pool = ThreadPoolExecutor(max_workers=max_workers)
    app.state.store = store

    @app.exception_handler(errors.FairplaiError)
    async def _fairplai_error(request: Request, exc: errors.FairplaiError):
        status = 400
        for klass, code in _HTTP_STATUS.items():
            if isinstance(exc, klass):
                status = code
                break
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, errors.UnrecognizedIntent):
            body["span"] = exc.span
        return ApiResponse(body, status_code=status)

    # -- datasets ----------------------------------------------------------

    @app.post("/v1/datasets", status_code=201)
    async def post_dataset(csv: UploadFile = File(...),
                           schema_file: UploadFile = File(..., alias="schema")):
        import tempfile
        with tempfile.NamedTemporaryFile(suffix=".csv") as cf, \
                tempfile.NamedTemporaryFile(suffix=".json") as sf:
            cf.write(await csv.read())
            cf.flush()
            sf.write(await schema_file.read())
            sf.flush()
            cols, label, protected = load_schema_file(sf.name)
            ds = load_csv(cf.name, cols, label, protected)
        digest = store.put_dataset(dataset_to_doc(ds))
        return ApiResponse({"id": digest, "rows": len(ds.rows),
                            "rows_dropped": ds.n_dropped,
                            "label": ds.label,
                            "protected": list(ds.protected)}, status_code=201)

    @app.get("/v1/datasets/{dataset_id}")
    async def get_dataset(dataset_id: str):
        doc = store.get_dataset(dataset_id)
        return ApiResponse({"id": dataset_id,
                            "schema": doc["schema"], "label": doc["label"],
                            "protected": doc["protected"],
                            "rows": len(doc["rows"])})

    # -- frontier jobs -----------------------------------------------------

    def _run_job(job: FrontierJob, ds, grid, master_seed, config):
        def progress(done, total):
            with jobs_lock:
                job.cells_done, job.cells_total = done, total

        with jobs_lock:
            job.status = "running"
            job.cells_total = grid.n_cells
        try:
            f = build_frontier(ds, grid, config=config, master_seed=master_seed,
                               store=store, progress_callback=progress)
            digest = store.put_frontier(f)
            with jobs_lock:
                job.result = digest
                job.status = "done"
        except Exception as exc:  # surfaced via the job record
            with jobs_lock:
                job.error = f"{type(exc).__name__}: {exc}"
                job.status = "failed"

    @app.post("/v1/frontiers", status_code=202)
    async def post_frontier(body: dict):
        ds = dataset_from_doc(store.get_dataset(body["dataset_id"]))
        grid = GridSpec.from_dict(body["grid"])
        master_seed = int(body.get("master_seed", 0))
        config = (TrainingConfig.from_dict(body["config"])
                  if "config" in body else DEFAULT_CONFIG)
        job = FrontierJob(id=f"job-{next(job_seq):06d}")
        with jobs_lock:
            jobs[job.id] = job
        pool.submit(_run_job, job, ds, grid, master_seed, config)
        return ApiResponse({"job_id": job.id}, status_code=202)

    @app.get("/v1/jobs/{job_id}")
    async def get_job(job_id: str):
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                raise errors.UnknownJob(job_id)
            return ApiResponse(job.to_dict())

    # -- frontiers ---------------------------------------------------------

    def _load_frontier(frontier_id: str) -> Frontier:
        return Frontier.from_dict(store.get_frontier_doc(frontier_id))

    @app.get("/v1/frontiers/{frontier_id}")
    async def get_frontier(frontier_id: str, pareto: str | None = None,
                           format: str = "json"):
        f = _load_frontier(frontier_id)
        if format == "csv":
            return ApiResponse({"id": frontier_id, "csv": export_csv(f)})
        doc = f.to_dict()
        if pareto:
            axes = tuple(a.strip() for a in pareto.split(","))
            doc["points"] = [p.to_dict() for p in pareto_filter(f, axes)]
        return ApiResponse({"id": frontier_id, "frontier": doc})

    # -- policy ------------------------------------------------------------

    @app.get("/v1/lexicon")
    async def get_lexicon():
        lex = policy.DEFAULT_LEXICON
        return ApiResponse({
            "version": lex.version,
            "fairness_intents": lex.fairness_intents,
            "fairness_descriptors": lex.fairness_descriptors,
            "privacy_descriptors": {k: list(v)
                                    for k, v in lex.privacy_descriptors.items()},
        })

    def _tuple_from_body(f: Frontier, body: dict):
        if "tuple" in body:
            tup = policy.PolicyTuple.from_dict(body["tuple"])
            provenance = {k: "given" for k in
                          ("criterion", "delta", "epsilon_band", "metric", "pi")}
        else:
            parsed = policy.parse_policy_prompt(body["prompt"])
            tup, provenance = policy.construct_tuple(parsed, f.protected)
        return tup, provenance

    @app.post("/v1/frontiers/{frontier_id}/policy")
    async def post_policy(frontier_id: str, body: dict):
        f = _load_frontier(frontier_id)
        tup, provenance = _tuple_from_body(f, body)
        cands = policy.filter_feasible(f, tup)
        return ApiResponse({
            "frontier_digest": f.digest(),
            "tuple": tup.to_dict(),
            "provenance": provenance,
            "explanation": policy.render_explanation(tup),
            "candidates": cands.to_dict(),
        })

    @app.post("/v1/frontiers/{frontier_id}/selection", status_code=201)
    async def post_selection(frontier_id: str, body: dict):
        f = _load_frontier(frontier_id)
        tup = policy.PolicyTuple.from_dict(body["tuple"])
        cands = policy.filter_feasible(f, tup)
        if "chosen_id" in body:
            chosen = body["chosen_id"]
            if chosen is not None and chosen not in cands.ids:
                raise errors.InfeasibleChoice(
                    f"{chosen} is not feasible under the submitted tuple")
            rationale = body.get("rationale") or ""
        else:
            chosen, rationale = policy.select_model(cands, f, tup)
        contract_id, doc = policy.issue_contract(
            tup, f, cands, chosen, rationale, store,
            expected_digest=body.get("frontier_digest"))
        return ApiResponse({"contract_id": contract_id, "contract": doc},
                           status_code=201)

    # -- contracts ---------------------------------------------------------

    @app.get("/v1/contracts/{contract_id}")
    async def get_contract(contract_id: str):
        return ApiResponse({"id": contract_id,
                            "contract": store.get_contract(contract_id)})

    @app.get("/v1/contracts/{contract_id}/audit")
    async def get_audit(contract_id: str):
        return ApiResponse(policy.audit_contract(contract_id, store))

    return app


def main():
    import os

    import uvicorn
    port = int(os.environ.get("FAIRPLAI_PORT", "8000"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
