"""Command-line front end.

The CLI is a thin HTTP client of the service: every numerical command
serializes its flags into the request models and posts them to the FastAPI
app — in-process over an ASGI test transport by default, or to a remote
server with --server.  Only `accept` (which must report per-criterion results and
set exit codes locally) and `serve` bypass HTTP.

Exit codes: 0 success, 2 validation error, 3 numeric error, 4 acceptance
failure.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process ASGI round-trip: same request/response path as a deployed
    # server, no socket required
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        resp = client.post(path, json=payload)
    if resp.status_code == 422:
        detail = resp.json().get("detail")
        click.echo(f"validation error: {detail}", err=True)
        sys.exit(EXIT_VALIDATION)
    if resp.status_code >= 500:
        try:
            detail = resp.json().get("detail")
        except Exception:
            detail = resp.text
        click.echo(f"numeric error: {detail}", err=True)
        sys.exit(EXIT_NUMERIC)
    resp.raise_for_status()
    return resp.json()


def _dump(data, out: str | None, fmt: str):
    if fmt == "json":
        text = json.dumps(data, indent=2, sort_keys=True)
    else:
        text = data if isinstance(data, str) else json.dumps(data)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


# shared parameter flags, repeated on each numerical command
def _param_options(f):
    for opt in reversed([
        click.option("--N", "n_edges", type=int, default=3, show_default=True),
        click.option("--k", type=int, default=0, show_default=True),
        click.option("--alpha", type=float, default=0.0, show_default=True),
        click.option("--m", type=float, default=1.0, show_default=True),
        click.option("--omega", type=float, default=0.0, show_default=True),
        click.option("--p", type=float, default=2.0, show_default=True),
    ]):
        f = opt(f)
    return f


def _grid_options(f):
    for opt in reversed([
        click.option("--L", "length", type=float, default=60.0, show_default=True),
        click.option("--M", "n_points", type=int, default=1000, show_default=True),
    ]):
        f = opt(f)
    return f


def _common_options(f):
    for opt in reversed([
        click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                     show_default=True),
        click.option("--server", default=None,
                     help="Base URL of a running service; default runs in-process."),
    ]):
        f = opt(f)
    return f


def _params_payload(n_edges, k, alpha, m, omega, p) -> dict:
    return {"N": n_edges, "k": k, "alpha": alpha, "m": m, "omega": omega, "p": p}


@click.group()
def main():
    """Standing-wave stability laboratory for NKG on a star graph."""


@main.command()
@_param_options
@_grid_options
@click.option("--no-refine", is_flag=True, help="Sample the closed form without Newton refinement.")
@_common_options
def profile(n_edges, k, alpha, m, omega, p, length, n_points, no_refine, out, fmt, server):
    """Build the standing-wave profile and report its residuals."""
    data = _post(server, "/profile", {
        "params": _params_payload(n_edges, k, alpha, m, omega, p),
        "grid": {"L": length, "M": n_points},
        "refine": not no_refine,
    })
    _dump(data, out, "json")


@main.command()
@_param_options
@_grid_options
@click.option("--which", type=click.Choice(["H", "L1", "L2", "block", "flow"]), default="H",
              show_default=True)
@click.option("--restrict", type=int, default=None,
              help="Restrict to the symmetric subspace L^2_k for this k.")
@click.option("--tol-zero", type=float, default=None)
@_common_options
def spectrum(n_edges, k, alpha, m, omega, p, length, n_points, which, restrict,
             tol_zero, out, fmt, server):
    """Solve an operator spectrum and report Morse index / nullity."""
    data = _post(server, "/spectrum", {
        "params": _params_payload(n_edges, k, alpha, m, omega, p),
        "grid": {"L": length, "M": n_points},
        "which": which, "restrict": restrict, "tol_zero": tol_zero,
    })
    _dump(data, out, "json")


@main.command()
@_param_options
@_common_options
def slope(n_edges, k, alpha, m, omega, p, out, fmt, server):
    """Closed-form charge slope d/domega Q and its sign region."""
    data = _post(server, "/slope", {
        "params": _params_payload(n_edges, k, alpha, m, omega, p),
    })
    _dump(data, out, "json")


@main.command()
@_param_options
@_grid_options
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--T", "t_final", type=float, default=5.0, show_default=True)
@click.option("--eps", type=float, default=0.0, show_default=True)
@click.option("--direction", type=click.Choice(["RadialSymmetric", "Generic"]),
              default="RadialSymmetric", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_common_options
def evolve(n_edges, k, alpha, m, omega, p, length, n_points, dt, t_final, eps,
           direction, seed, out, fmt, server):
    """Evolve the (perturbed) standing wave and report drifts/orbit distance."""
    data = _post(server, "/evolve", {
        "params": _params_payload(n_edges, k, alpha, m, omega, p),
        "grid": {"L": length, "M": n_points},
        "dt": dt, "T": t_final, "eps": eps, "direction": direction, "seed": seed,
    })
    if fmt == "csv":
        lines = ["t,energy,charge"]
        lines += [f"{t!r},{e!r},{q!r}" for t, e, q in
                  zip(data["times"], data["energies"], data["charges"])]
        _dump("\n".join(lines), out, "csv")
    else:
        _dump(data, out, "json")


@main.command()
@_param_options
@_grid_options
@_common_options
def classify(n_edges, k, alpha, m, omega, p, length, n_points, out, fmt, server):
    """Stability verdict with theorem clause and evidence."""
    data = _post(server, "/classify", {
        "params": _params_payload(n_edges, k, alpha, m, omega, p),
        "grid": {"L": length, "M": n_points},
    })
    if fmt == "csv":
        from .stability import CSV_HEADER

        _dump(CSV_HEADER + "\n" + data["csv_row"], out, "csv")
    else:
        _dump(data, out, "json")


@main.command("phase-diagram")
@click.option("--sweep-file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON list of parameter objects {N, k, alpha, m, omega, p}.")
@_grid_options
@_common_options
def phase_diagram(sweep_file, length, n_points, out, fmt, server):
    """Classify a sweep of parameter points; emits a CSV table."""
    with open(sweep_file) as f:
        sweep = json.load(f)
    if not isinstance(sweep, list):
        click.echo("validation error: sweep file must hold a JSON list", err=True)
        sys.exit(EXIT_VALIDATION)
    data = _post(server, "/phase-diagram", {
        "sweep": sweep, "grid": {"L": length, "M": n_points},
    })
    if fmt == "csv":
        _dump("\n".join([data["header"], *data["rows"]]), out, "csv")
    else:
        _dump(data, out, "json")
    for item in data["skipped"]:
        click.echo(f"skipped: {item['params']} -- {item['reason']}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command()
@click.option("--only", type=int, multiple=True,
              help="Run only these criterion numbers (repeatable).")
def accept(only):
    """Run the acceptance suite; exit 4 on any failing criterion."""
    from .acceptance import run_all

    ok = run_all(only=set(only) or None)
    if not ok:
        sys.exit(EXIT_ACCEPTANCE)


if __name__ == "__main__":
    main()
