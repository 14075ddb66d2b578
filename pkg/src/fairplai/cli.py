"""Command-line interface: ingest data, build frontiers, translate policy
prompts, select models and audit contracts against a local artifact store.

The store root comes from --store or the FAIRPLAI_STORE environment
variable (default ./.fairplai). All ids printed are content digests.
"""

import json
import sys

import click

from . import errors, policy
from .config import DEFAULT_CONFIG, TrainingConfig
from .dataset import dataset_from_doc, dataset_to_doc, load_csv, load_schema_file
from .frontier import Frontier, GridSpec, build_frontier, export_csv
from .store import Store, default_store


def _store(path):
    return Store(path) if path else default_store()


def _echo_json(doc):
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


@click.group()
def main():
    """Train under privacy and fairness constraints, map the trade-off
    frontier, and select models through auditable policy contracts."""


@main.command()
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True,
              type=click.Path(exists=True), help="JSON schema sidecar.")
@click.option("--store", "store_path", envvar="FAIRPLAI_STORE", default=None)
def ingest(csv_path, schema_path, store_path):
    """Validate a CSV against its schema and store it content-addressed."""
    cols, label, protected = load_schema_file(schema_path)
    ds = load_csv(csv_path, cols, label, protected)
    digest = _store(store_path).put_dataset(dataset_to_doc(ds))
    _echo_json({"id": digest, "rows": len(ds.rows),
                "rows_dropped": ds.n_dropped, "protected": list(protected)})


@main.command()
@click.option("--dataset", "dataset_id", required=True)
@click.option("--grid", "grid_json", required=True,
              help="GridSpec as JSON text or @file.")
@click.option("--seed", "master_seed", default=0, show_default=True)
@click.option("--config", "config_json", default=None,
              help="TrainingConfig overrides as JSON text or @file.")
@click.option("--store", "store_path", envvar="FAIRPLAI_STORE", default=None)
def frontier(dataset_id, grid_json, master_seed, config_json, store_path):
    """Build the full privacy x fairness x model frontier for a dataset."""
    store = _store(store_path)
    ds = dataset_from_doc(store.get_dataset(dataset_id))
    grid = GridSpec.from_dict(_load_json_arg(grid_json))
    cfg = DEFAULT_CONFIG
    if config_json:
        cfg = TrainingConfig.from_dict({**DEFAULT_CONFIG.to_dict(),
                                        **_load_json_arg(config_json)})

    def progress(done, total):
        click.echo(f"\rcells {done}/{total}", nl=False, err=True)

    f = build_frontier(ds, grid, config=cfg, master_seed=master_seed,
                       store=store, progress_callback=progress)
    click.echo("", err=True)
    digest = store.put_frontier(f)
    ok = sum(1 for p in f.points if p.status == "ok")
    _echo_json({"id": digest, "points": len(f.points), "ok": ok,
                "failed": len(f.points) - ok})


def _load_json_arg(arg):
    if arg.startswith("@"):
        with open(arg[1:]) as fh:
            return json.load(fh)
    return json.loads(arg)


@main.command()
@click.option("--prompt", required=True)
@click.option("--attributes", default=None,
              help="Comma-separated audited attributes (required to emit a "
                   "complete tuple).")
def translate(prompt, attributes):
    """Parse a plain-language prompt into a policy tuple."""
    parsed = policy.parse_policy_prompt(prompt)
    out = {"parsed": {
        "criterion": parsed.criterion, "delta": parsed.delta,
        "epsilon_band": list(parsed.epsilon_band) if parsed.epsilon_band else None,
        "metric": list(parsed.metric) if parsed.metric else None,
        "pi": list(parsed.pi) if parsed.pi else None,
        "unmatched": list(parsed.unmatched)}}
    if attributes:
        tup, provenance = policy.construct_tuple(
            parsed, tuple(a.strip() for a in attributes.split(",")))
        out["tuple"] = tup.to_dict()
        out["provenance"] = provenance
        out["explanation"] = policy.render_explanation(tup)
    _echo_json(out)


@main.command()
@click.option("--frontier", "frontier_id", required=True)
@click.option("--prompt", required=True)
@click.option("--choose", "chosen", default=None,
              help="Point id to select; default picks under the tuple's "
                   "priority policy.")
@click.option("--store", "store_path", envvar="FAIRPLAI_STORE", default=None)
def select(frontier_id, prompt, chosen, store_path):
    """Translate, filter the frontier, select a model, issue a contract."""
    store = _store(store_path)
    f = Frontier.from_dict(store.get_frontier_doc(frontier_id))
    parsed = policy.parse_policy_prompt(prompt)
    tup, provenance = policy.construct_tuple(parsed, f.protected)
    cands = policy.filter_feasible(f, tup)
    if chosen is None:
        chosen, rationale = policy.select_model(cands, f, tup)
    elif chosen not in cands.ids:
        raise errors.InfeasibleChoice(chosen)
    else:
        rationale = "chosen explicitly by the operator"
    contract_id, doc = policy.issue_contract(tup, f, cands, chosen,
                                             rationale, store)
    _echo_json({"contract_id": contract_id,
                "chosen_id": chosen,
                "feasible_ids": list(cands.ids),
                "provenance": provenance,
                "diagnostics": dict(cands.diagnostics)})


@main.command()
@click.option("--contract", "contract_id", required=True)
@click.option("--store", "store_path", envvar="FAIRPLAI_STORE", default=None)
def audit(contract_id, store_path):
    """Re-verify a contract from stored artifacts; exit 1 on failure."""
    report = policy.audit_contract(contract_id, _store(store_path))
    _echo_json(report)
    if not report["passed"]:
        sys.exit(1)


@main.command()
@click.option("--frontier", "frontier_id", required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="json", show_default=True)
@click.option("--store", "store_path", envvar="FAIRPLAI_STORE", default=None)
def report(frontier_id, fmt, store_path):
    """Dump a frontier as JSON or CSV."""
    f = Frontier.from_dict(_store(store_path).get_frontier_doc(frontier_id))
    if fmt == "csv":
        click.echo(export_csv(f))
    else:
        _echo_json(f.to_dict())


@main.command()
@click.option("--port", envvar="FAIRPLAI_PORT", default=8000, show_default=True)
@click.option("--store", "store_path", envvar="FAIRPLAI_STORE", default=None)
def serve(port, store_path):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(_store(store_path)), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
