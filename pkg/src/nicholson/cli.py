"""Command-line front end.

Every subcommand is a thin client of the HTTP service: by default the
requests run against the FastAPI app in-process; pass ``--server URL`` to
talk to a running instance instead. Exit codes: 0 ok, 1 structural rule
violated, 2 parse error, 3 numeric failure, 4 reproduction label mismatch.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_MISMATCH = 4


def _make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # some starlette builds warn about the httpx-backed TestClient import
        warnings.filterwarnings("ignore", message=".*starlette.testclient.*")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app, base_url="http://nicholson.local", raise_server_exceptions=False)


def _load_scenario_payload(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot parse scenario file {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    if not isinstance(data, dict):
        click.echo("error: scenario document must be a JSON object", err=True)
        sys.exit(EXIT_PARSE)
    return data


def _fail_from_response(resp: httpx.Response) -> None:
    """Translate an error response into the exit-code contract."""
    try:
        detail = resp.json().get("detail")
    except ValueError:
        detail = resp.text
    if resp.status_code == 422:
        click.echo(f"error: malformed request: {detail}", err=True)
        sys.exit(EXIT_PARSE)
    kind = detail.get("kind") if isinstance(detail, dict) else None
    click.echo(f"error: {json.dumps(detail, sort_keys=True)}", err=True)
    if kind == "parse":
        sys.exit(EXIT_PARSE)
    if kind == "invalid-system":
        sys.exit(EXIT_INVARIANT)
    if kind == "numeric" or resp.status_code >= 500:
        sys.exit(EXIT_NUMERIC)
    sys.exit(EXIT_PARSE)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service (default: in-process app).")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Analyze and simulate n-patch Nicholson systems with delays."""
    ctx.obj = _make_client(server)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def validate(client: httpx.Client, path: str) -> None:
    """Check the structural rules of a scenario file."""
    payload = _load_scenario_payload(path)
    resp = client.post("/validate", json=payload)
    if resp.status_code != 200:
        _fail_from_response(resp)
    report = resp.json()
    click.echo(_dump(report))
    sys.exit(EXIT_OK if report["ok"] else EXIT_INVARIANT)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Also write the report JSON to this file.")
@click.pass_obj
def classify(client: httpx.Client, path: str, out: str | None) -> None:
    """Full threshold classification with certificates."""
    payload = _load_scenario_payload(path)
    resp = client.post("/classify", json=payload)
    if resp.status_code != 200:
        _fail_from_response(resp)
    text = _dump(resp.json())
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    click.echo(text)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--t-end", type=float, default=None, help="Override the scenario horizon.")
@click.option("--dt", type=float, default=None, help="Override the step size.")
@click.option("--out", type=click.Path(dir_okay=False), default="trajectory.csv",
              show_default=True, help="Trajectory CSV output path.")
@click.pass_obj
def simulate(client: httpx.Client, path: str, t_end: float | None, dt: float | None,
             out: str) -> None:
    """Integrate the delay system; writes the CSV and prints tail statistics."""
    payload = _load_scenario_payload(path)
    body = {"scenario": payload}
    if t_end is not None:
        body["t_end"] = t_end
    if dt is not None:
        body["dt"] = dt
    resp = client.post("/simulate", json=body)
    if resp.status_code != 200:
        _fail_from_response(resp)
    data = resp.json()
    Path(out).write_text(data["csv"], encoding="utf-8")
    click.echo(_dump({
        "name": data["name"],
        "labels": data["labels"],
        "tail": data["tail"],
        "x_star": data["x_star"],
        "csv": out,
    }))
    sys.exit(EXIT_OK)


@main.command()
@click.argument("figure_id", type=str)
@click.option("--out-dir", type=click.Path(file_okay=False), default="reproductions",
              show_default=True, help="Directory receiving <figure-id>/manifest.json + CSV.")
@click.pass_obj
def reproduce(client: httpx.Client, figure_id: str, out_dir: str) -> None:
    """Rerun a built-in preset (1a 1b 2a 2b 3a 3b, or 'all').

    Exit code 0 means every observed tail label matched the preset's
    expectation; 4 flags a mismatch.
    """
    resp = client.get("/presets")
    if resp.status_code != 200:
        _fail_from_response(resp)
    known = [fig["figure_id"] for fig in resp.json()["figures"]]
    targets = known if figure_id == "all" else [figure_id]
    if not set(targets) <= set(known):
        click.echo(f"error: unknown figure id {figure_id!r}; choose from {known} or 'all'",
                   err=True)
        sys.exit(EXIT_PARSE)

    all_matched = True
    for fid in targets:
        resp = client.post("/reproduce", json={"figure_id": fid})
        if resp.status_code != 200:
            _fail_from_response(resp)
        data = resp.json()
        target_dir = Path(out_dir) / fid
        target_dir.mkdir(parents=True, exist_ok=True)
        (target_dir / "trajectory.csv").write_text(data["csv"], encoding="utf-8")
        (target_dir / "manifest.json").write_text(_dump(data["manifest"]) + "\n",
                                                  encoding="utf-8")
        manifest = data["manifest"]
        click.echo(f"{fid}: observed={manifest['observed_labels']} "
                   f"expected={manifest['expected_labels']} "
                   f"matched={manifest['matched']}")
        all_matched = all_matched and data["matched"]
    sys.exit(EXIT_OK if all_matched else EXIT_MISMATCH)


@main.command("sweep-delay")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--patch", type=int, required=True, help="Patch number (1-based).")
@click.option("--delay-index", type=int, default=1, show_default=True,
              help="Delay column k (1-based).")
@click.option("--from", "tau_from", type=float, required=True, help="First delay value.")
@click.option("--to", "tau_to", type=float, required=True, help="Last delay value.")
@click.option("--steps", type=int, required=True, help="Number of grid points.")
@click.option("--t-end", type=float, default=None, help="Override the scenario horizon.")
@click.option("--dt", type=float, default=None, help="Override the step size.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the table here instead of stdout.")
@click.pass_obj
def sweep_delay(client: httpx.Client, path: str, patch: int, delay_index: int,
                tau_from: float, tau_to: float, steps: int,
                t_end: float | None, dt: float | None, out: str | None) -> None:
    """Sweep one delay over a grid and tabulate the swept patch's tail label."""
    payload = _load_scenario_payload(path)
    body = {
        "scenario": payload,
        "patch": patch - 1,
        "delay_index": delay_index - 1,
        "tau_from": tau_from,
        "tau_to": tau_to,
        "steps": steps,
    }
    if t_end is not None:
        body["t_end"] = t_end
    if dt is not None:
        body["dt"] = dt
    resp = client.post("/sweep", json=body)
    if resp.status_code != 200:
        _fail_from_response(resp)
    rows = resp.json()["rows"]
    lines = ["tau,label,amplitude"]
    lines += [f"{row['tau']:.17g},{row['label']},{row['amplitude']:.17g}" for row in rows]
    table = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(table, encoding="utf-8")
    else:
        click.echo(table, nl=False)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
