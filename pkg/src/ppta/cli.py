"""Command-line client for the checker service.

By default the commands talk to an in-process instance of the HTTP
app, so no server needs to run; `--server URL` points them at a remote
one instead.  Exit codes: 0 success, 1 usage, 2 parse/validation,
3 engine precondition, 4 internal error.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

# usage errors exit with 1 (click's default is 2, which we reserve for
# parse/validation failures)
click.UsageError.exit_code = 1

EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_PRECONDITION = 3
EXIT_INTERNAL = 4

_KIND_EXITS = {"usage": EXIT_USAGE, "parse": EXIT_MODEL,
               "validation": EXIT_MODEL, "precondition": EXIT_PRECONDITION,
               "internal": EXIT_INTERNAL}


def _client(server):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service.app import app
    return TestClient(app)


def _post(server, path, payload):
    try:
        with _client(server) as client:
            resp = client.post(path, json=payload)
    except httpx.HTTPError as e:
        click.echo(f"error: cannot reach server: {e}", err=True)
        sys.exit(EXIT_INTERNAL)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        body = {}
    if "error" in body:
        kind = body["error"].get("kind", "internal")
        message = body["error"].get("message", "unknown error")
    elif "detail" in body:
        kind, message = "usage", json.dumps(body["detail"])
    else:
        kind, message = "internal", f"HTTP {resp.status_code}"
    click.echo(f"error ({kind}): {message}", err=True)
    sys.exit(_KIND_EXITS.get(kind, EXIT_INTERNAL))


def _read_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        click.echo(f"error: cannot read model: {e}", err=True)
        sys.exit(EXIT_USAGE)


def _parse_int_assignments(text, what):
    out = {}
    for part in filter(None, (text or "").split(",")):
        if "=" not in part:
            raise click.UsageError(f"bad {what} entry {part!r}, expected NAME=INT")
        name, _, value = part.partition("=")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise click.UsageError(f"bad integer {value!r} in {what}") from None
    return out


def _parse_rho(text):
    out = {}
    for part in filter(None, (text or "").split(",")):
        if "=" not in part:
            raise click.UsageError(f"bad rho entry {part!r}, expected NAME=RAT")
        name, _, value = part.partition("=")
        out[name.strip()] = value.strip()
    return out


def _targets(text):
    out = [t.strip() for t in (text or "").split(",") if t.strip()]
    if not out:
        raise click.UsageError("at least one target location is required")
    return out


_server_option = click.option("--server", default=None,
                              help="Base URL of a running ppta server "
                                   "(default: in-process).")
_format_option = click.option("--format", "fmt",
                              type=click.Choice(["text", "records"]),
                              default="text", help="Output style.")


@click.group()
def main():
    """Model checking and parameter synthesis for parametric
    probabilistic timed automata."""


@main.command()
@click.argument("model", type=click.Path())
@_server_option
@_format_option
def info(model, server, fmt):
    """Classification, closedness, and validation report for MODEL."""
    data = _post(server, "/info", {"source": _read_model(model)})
    if fmt == "records":
        click.echo(json.dumps(data, sort_keys=True))
        return
    click.echo(f"model: {data['name']}")
    click.echo(f"clocks: {', '.join(data['clocks']) or '-'}")
    click.echo(f"locations: {', '.join(data['locations'])}")
    click.echo(f"initial: {data['initial']}")
    click.echo(f"actions: {', '.join(data['actions']) or '-'}")
    for p, (lo, hi) in sorted(data["clock_params"].items()):
        cls = data["classification"][p]
        click.echo(f"clock param {p} in [{lo}, {hi}]: {cls}")
    for p, (lo, hi) in sorted(data["prob_params"].items()):
        click.echo(f"prob param {p} in [{lo}, {hi}]")
    click.echo("closed: " + ("yes" if data["closed"] else "no"))
    for label, ks in sorted(data["max_constants"].items()):
        body = ", ".join(f"{c}={k}" for c, k in sorted(ks.items())) or "-"
        click.echo(f"max constants at {label}: {body}")
    for d in data["diagnostics"]:
        click.echo(f"diagnostic: {d}")
    if data["diagnostics"]:
        sys.exit(EXIT_MODEL)


@main.command()
@click.argument("model", type=click.Path())
@click.option("--target", required=True, help="Target locations, comma separated.")
@click.option("--objective", type=click.Choice(["max", "min"]), default="max")
@click.option("--engine", type=click.Choice(["digital", "backwards"]),
              default="digital")
@click.option("--mode", type=click.Choice(["exact", "iterate"]), default="exact")
@click.option("--gamma", default="", help="Clock parameter values, NAME=INT[,...].")
@click.option("--rho", default="", help="Probability parameter values, "
                                        "NAME=RAT[,...].")
@click.option("--cap", type=int, default=None,
              help="Backwards exploration rule cap.")
@_server_option
@_format_option
def check(model, target, objective, engine, mode, gamma, rho, cap, server, fmt):
    """Reachability probability of MODEL at one parameter point."""
    payload = {"source": _read_model(model), "targets": _targets(target),
               "objective": objective, "engine": engine, "mode": mode,
               "gamma": _parse_int_assignments(gamma, "gamma"),
               "rho": _parse_rho(rho)}
    if cap is not None:
        payload["cap"] = cap
    data = _post(server, "/check", payload)
    if fmt == "records":
        click.echo(json.dumps(data, sort_keys=True))
        return
    if data["mode"] == "exact":
        click.echo(f"{objective} reachability = {data['value']}")
    else:
        click.echo(f"{objective} reachability = {data['value_float']:.10f} "
                   f"(iterative, tolerance 1e-8)")
    _echo_flags(data.get("flags") or {})


def _echo_flags(flags):
    if flags.get("truncated"):
        click.echo("note: exploration truncated; value is a lower bound")
    for w in flags.get("zeno_caveat") or []:
        click.echo(f"caveat: {w}; min quantifies over all schedulers, "
                   f"including time-convergent ones")
    if flags.get("witness"):
        click.echo(f"witness: {flags['witness']}")
    if flags.get("lu_fixed"):
        body = ", ".join(f"{p}={v}" for p, v in sorted(flags["lu_fixed"].items()))
        click.echo(f"reduction fixed: {body}")


def _gamma_set_points(path):
    points = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.split("//")[0].strip()
                if line:
                    points.append(_parse_int_assignments(line, "gamma-set"))
    except OSError as e:
        raise click.UsageError(f"cannot read gamma set: {e}") from None
    if not points:
        raise click.UsageError("gamma set file contains no valuations")
    return points


def _gamma_ranges(entries):
    out = {}
    for entry in entries:
        if "=" not in entry or ":" not in entry.split("=", 1)[1]:
            raise click.UsageError(f"bad range {entry!r}, expected NAME=LO:HI")
        name, _, body = entry.partition("=")
        lo, _, hi = body.partition(":")
        try:
            out[name.strip()] = (int(lo), int(hi))
        except ValueError:
            raise click.UsageError(f"bad integers in range {entry!r}") from None
    return out


def _rho_grid(entries):
    grid = {}
    for entry in entries:
        if ":#" in entry:
            name, _, count = entry.partition(":#")
            try:
                grid[name.strip()] = int(count)
            except ValueError:
                raise click.UsageError(f"bad count in {entry!r}") from None
        elif "=" in entry:
            name, _, body = entry.partition("=")
            values = [v.strip() for v in body.split(",") if v.strip()]
            if not values:
                raise click.UsageError(f"empty grid in {entry!r}")
            grid[name.strip()] = values
        else:
            raise click.UsageError(f"bad grid {entry!r}, expected "
                                   f"NAME=RAT[,...] or NAME:#N")
    return grid


@main.command()
@click.argument("model", type=click.Path())
@click.option("--target", required=True, help="Target locations, comma separated.")
@click.option("--objective", type=click.Choice(["max", "min"]), default="max")
@click.option("--engine", type=click.Choice(["digital", "backwards"]),
              default="digital")
@click.option("--mode", type=click.Choice(["exact", "iterate"]), default="exact")
@click.option("--rho-grid", "rho_grid", multiple=True,
              help="NAME=RAT[,...] explicit values or NAME:#N evenly spaced.")
@click.option("--gamma-range", "gamma_range", multiple=True,
              help="Override a clock-parameter interval, NAME=LO:HI.")
@click.option("--gamma-set", "gamma_set", type=click.Path(), default=None,
              help="File of explicit clock-parameter valuations, one per line.")
@click.option("--no-reduce", is_flag=True, default=False,
              help="Skip the L/U endpoint-fixing pre-pass.")
@click.option("--cap", type=int, default=None)
@_server_option
@_format_option
def synth(model, target, objective, engine, mode, rho_grid, gamma_range,
          gamma_set, no_reduce, cap, server, fmt):
    """Optimize reachability over a clock-parameter region and a
    probability grid."""
    payload = {"source": _read_model(model), "targets": _targets(target),
               "objective": objective, "engine": engine, "mode": mode,
               "rho_grid": _rho_grid(rho_grid), "reduction": not no_reduce}
    if gamma_set and gamma_range:
        raise click.UsageError("--gamma-set and --gamma-range are exclusive")
    if gamma_set:
        payload["region"] = {"explicit": _gamma_set_points(gamma_set)}
    elif gamma_range:
        payload["region"] = {"rectangular": _gamma_ranges(gamma_range)}
    if cap is not None:
        payload["cap"] = cap
    data = _post(server, "/synth", payload)
    if fmt == "records":
        for row in data["table"]:
            click.echo(json.dumps(row, sort_keys=True))
        click.echo(json.dumps({"best": data["best"], "fixed": data["fixed"],
                               "flags": data["flags"]}, sort_keys=True))
        return
    best = data["best"]
    gtxt = ", ".join(f"{p}={v}" for p, v in sorted(best["gamma"].items())) or "-"
    rtxt = ", ".join(f"{p}={v}" for p, v in sorted(best["rho"].items())) or "-"
    click.echo(f"best: gamma {gtxt}; rho {rtxt}; value {best['value']}")
    click.echo(f"evaluated points: {len(data['table'])}")
    _echo_flags(data.get("flags") or {})


@main.command()
@click.argument("model", type=click.Path())
@click.option("--objective", type=click.Choice(["max", "min"]), default="max")
@click.option("--gamma-range", "gamma_range", multiple=True,
              help="Override a clock-parameter interval, NAME=LO:HI.")
@click.option("--gamma-set", "gamma_set", type=click.Path(), default=None,
              help="File of explicit clock-parameter valuations.")
@_server_option
@_format_option
def reduce(model, objective, gamma_range, gamma_set, server, fmt):
    """Fix separable lower/upper-bound clock parameters at their
    optimal endpoints."""
    payload = {"source": _read_model(model), "objective": objective}
    if gamma_set and gamma_range:
        raise click.UsageError("--gamma-set and --gamma-range are exclusive")
    if gamma_set:
        payload["region"] = {"explicit": _gamma_set_points(gamma_set)}
    elif gamma_range:
        payload["region"] = {"rectangular": _gamma_ranges(gamma_range)}
    data = _post(server, "/reduce", payload)
    if fmt == "records":
        click.echo(json.dumps(data, sort_keys=True))
        return
    click.echo(data["report"])


@main.command()
@click.argument("model", type=click.Path())
@click.option("--target", required=True, help="Target locations, comma separated.")
@click.option("--engine", type=click.Choice(["digital", "backwards"]),
              default="digital")
@click.option("--gamma", default="", help="Clock parameter values, NAME=INT[,...].")
@click.option("--rho", default="", help="Probability parameter values (optional; "
                                        "weights stay symbolic without them).")
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write the document here instead of stdout.")
@click.option("--cap", type=int, default=None)
@_server_option
def export(model, target, engine, gamma, rho, output, cap, server):
    """Dump the finite MDP built by an engine, as stable text."""
    payload = {"source": _read_model(model), "targets": _targets(target),
               "engine": engine,
               "gamma": _parse_int_assignments(gamma, "gamma"),
               "rho": _parse_rho(rho)}
    if cap is not None:
        payload["cap"] = cap
    data = _post(server, "/export", payload)
    if output:
        try:
            with open(output, "w", encoding="utf-8") as fh:
                fh.write(data["document"])
        except OSError as e:
            click.echo(f"error: cannot write output: {e}", err=True)
            sys.exit(EXIT_INTERNAL)
    else:
        click.echo(data["document"], nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    from .service.app import app
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
