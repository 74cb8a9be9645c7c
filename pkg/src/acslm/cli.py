"""Manifest-driven front end.

``acslm run <manifest>`` loads link descriptions, a core complex, and weight
choices from a JSON manifest, executes the requested analyses in dependency
order, and writes a consolidated JSON report.  ``acslm explain <report>
<block>`` renders one result block as a human-readable table with the
formulas spelled out.

Exit codes: 0 success, 2 validation error, 3 numeric failure, 4 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, ac_geometry, cone_solver, indicial, link_spectrum, moduli, topology
from .errors import (
    AcslmError,
    InternalConsistencyError,
    NumericError,
    ValidationError,
)

ANALYSES = ("spectrum", "weights", "topology", "moduli", "cone", "geodesic")

BUILTIN_COMPLEXES = {
    "tetra_ball": topology.tetra_ball,
    "annulus": topology.annulus,
    "s2_times_i": topology.s2_times_i,
    "t2_times_i": topology.t2_times_i,
}

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_INTERNAL = 4


def _fail(pointer: str, message: str):
    raise ValidationError(f"{pointer}: {message}")


def validate_manifest(man: dict, base: Path) -> dict:
    """Structural validation; error messages carry JSON-pointer paths."""
    if not isinstance(man, dict):
        _fail("", "manifest must be a JSON object")
    analyses = man.get("analyses")
    if not isinstance(analyses, list) or not analyses:
        _fail("/analyses", "must be a nonempty list")
    for i, a in enumerate(analyses):
        if a not in ANALYSES:
            _fail(f"/analyses/{i}", f"unknown analysis {a!r}; choose from {ANALYSES}")
    needs_ends = {"spectrum", "weights", "moduli", "cone"} & set(analyses)
    if needs_ends:
        n = man.get("n")
        if not isinstance(n, int) or n <= 2:
            _fail("/n", "must be an integer > 2")
        ends = man.get("ends")
        if not isinstance(ends, list) or not ends:
            _fail("/ends", "must be a nonempty list of link descriptors")
        for i, e in enumerate(ends):
            kind = e.get("kind")
            if kind == "sphere":
                if not (isinstance(e.get("dim"), int) and e["dim"] >= 2):
                    _fail(f"/ends/{i}/dim", "sphere dimension must be an integer >= 2")
                if not (isinstance(e.get("radius"), (int, float)) and e["radius"] > 0):
                    _fail(f"/ends/{i}/radius", "sphere radius must be positive")
                if "lambda_max" not in e:
                    _fail(f"/ends/{i}/lambda_max", "sphere links need lambda_max")
            elif kind == "torus":
                if "basis" not in e:
                    _fail(f"/ends/{i}/basis", "torus links need a lattice basis")
                if "lambda_max" not in e:
                    _fail(f"/ends/{i}/lambda_max", "torus links need lambda_max")
            elif kind == "mesh":
                path = e.get("path")
                if not path:
                    _fail(f"/ends/{i}/path", "mesh links need an OFF file path")
                if not (base / path).exists():
                    _fail(f"/ends/{i}/path", f"file {path!r} does not exist")
                if not isinstance(e.get("count"), int) or e["count"] < 1:
                    _fail(f"/ends/{i}/count", "mesh links need a positive eigenvalue count")
            else:
                _fail(f"/ends/{i}/kind", f"unknown link kind {kind!r}")
    if {"topology", "moduli"} & set(analyses):
        topo = man.get("topology")
        if not isinstance(topo, dict):
            _fail("/topology", "must be an object with 'path' or 'builtin'")
        if "builtin" in topo:
            if topo["builtin"] not in BUILTIN_COMPLEXES:
                _fail(
                    "/topology/builtin",
                    f"unknown builtin {topo['builtin']!r}; have {sorted(BUILTIN_COMPLEXES)}",
                )
        elif "path" in topo:
            if not (base / topo["path"]).exists():
                _fail("/topology/path", f"file {topo['path']!r} does not exist")
        else:
            _fail("/topology", "needs 'path' or 'builtin'")
    if {"weights", "moduli"} & set(analyses):
        w = man.get("weights")
        if not isinstance(w, dict):
            _fail("/weights", "must be an object")
        if "moduli" in analyses and not isinstance(w.get("epsilon"), (int, float)):
            _fail("/weights/epsilon", "moduli analysis needs a numeric epsilon")
    if "cone" in analyses:
        c = man.get("cone")
        if not isinstance(c, dict) or "profile" not in c:
            _fail("/cone", "must be an object naming a 'profile'")
        if c["profile"] not in cone_solver.PROFILES:
            _fail("/cone/profile", f"unknown profile; have {sorted(cone_solver.PROFILES)}")
    if "geodesic" in analyses:
        g = man.get("geometry")
        if not isinstance(g, dict) or "chart" not in g:
            _fail("/geometry", "must be an object naming a 'chart'")
    return man


def _build_spectra(man: dict, base: Path) -> list[link_spectrum.LinkSpectrum]:
    specs = []
    for e in man["ends"]:
        if e["kind"] == "sphere":
            specs.append(
                link_spectrum.sphere_spectrum(e["dim"], e["radius"], e["lambda_max"])
            )
        elif e["kind"] == "torus":
            specs.append(
                link_spectrum.torus_spectrum(np.array(e["basis"]), e["lambda_max"])
            )
        else:
            mesh = link_spectrum.load_off(base / e["path"])
            specs.append(link_spectrum.fem_spectrum(mesh, e["count"]))
    return specs


def _load_complex(man: dict, base: Path) -> topology.SimplicialComplex:
    topo = man["topology"]
    if "builtin" in topo:
        return BUILTIN_COMPLEXES[topo["builtin"]]()
    return topology.load_complex(base / topo["path"])


def run(man: dict, base: Path, seed: int | None = None, timings: bool = False) -> tuple[dict, int]:
    """Execute the manifest; returns (report dict, exit code)."""
    validate_manifest(man, base)
    analyses = man["analyses"]
    blocks: dict[str, dict] = {}
    state: dict = {}
    exit_code = EXIT_OK

    order = [a for a in ANALYSES if a in analyses]
    for name in order:
        t0 = time.perf_counter()
        try:
            blocks[name] = _run_block(name, man, base, state, seed)
        except AcslmError as exc:
            blocks[name] = {
                "error": {"type": type(exc).__name__, "message": str(exc)}
            }
            exit_code = max(exit_code, _code_for(exc))
        if timings:
            blocks[name]["wall_clock_s"] = round(time.perf_counter() - t0, 6)

    report = {
        "tool": "acslm",
        "version": __version__,
        "manifest": man,
        "blocks": blocks,
    }
    return report, exit_code


def _code_for(exc: AcslmError) -> int:
    if isinstance(exc, InternalConsistencyError):
        return EXIT_INTERNAL
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_VALIDATION


def _run_block(name, man, base, state, seed):
    if name == "spectrum":
        specs = _build_spectra(man, base)
        state["spectra"] = specs
        return {
            "inputs": {"ends": man["ends"]},
            "values": {
                "spectra": [s.to_json_pairs() for s in specs],
                "sources": [s.source for s in specs],
                "truncations": [s.truncation for s in specs],
            },
            "provenance": ["link_spectrum.spectrum_of"],
        }

    if name == "weights":
        specs = state.get("spectra") or _build_spectra(man, base)
        state["spectra"] = specs
        ends = indicial.EndSpectra(tuple(specs), man["n"])
        state["ends"] = ends
        window = man.get("weights", {}).get("window")
        if window is None:
            window = [-(man["n"] - 1.0), man["n"] - 1.0]
        ew = indicial.exceptional_weights(ends, window)
        return {
            "inputs": {"window": window, "n": man["n"]},
            "values": {
                "weights": json.loads(ew.to_json()),
                "sublinear_growth_exists": indicial.sublinear_growth_exists(ends),
            },
            "provenance": [
                "indicial.exceptional_weights",
                "indicial.sublinear_growth_exists",
            ],
        }

    if name == "topology":
        cx = _load_complex(man, base)
        rep = topology.cohomology_report(cx)
        state["cohomology"] = rep
        return {
            "inputs": {"topology": man["topology"], "counts": cx.counts()},
            "values": {
                "dim_H1": rep.dim_H1,
                "dim_H1c": rep.dim_H1c,
                "rank_i": rep.rank_i,
                "ends": rep.s,
                "betti": list(rep.betti),
                "euler_characteristic": cx.euler_characteristic(),
            },
            "provenance": [
                "topology.betti",
                "topology.relative_h1",
                "topology.rank_i",
                "topology.ends_count",
            ],
        }

    if name == "moduli":
        specs = state.get("spectra") or _build_spectra(man, base)
        ends = state.get("ends") or indicial.EndSpectra(tuple(specs), man["n"])
        rep = state.get("cohomology")
        if rep is None:
            rep = topology.cohomology_report(_load_complex(man, base))
        w = man.get("weights", {})
        inp = moduli.ModuliInput(
            n=man["n"],
            ends=ends,
            cohomology=rep,
            epsilon=float(w.get("epsilon", moduli.DEFAULT_EPSILON)),
            l2_theorem_applicable=bool(w.get("l2_theorem_applicable", True)),
        )
        mrep = moduli.moduli_report(inp, w.get("delta_list", ()))
        return {
            "inputs": mrep.inputs,
            "values": {
                "dim_def_sl": mrep.dim_def_sl,
                "dim_def_sl_l2": mrep.dim_def_sl_l2,
                "dim_K1_eps": mrep.dim_K1_eps,
                "dim_K1_table": mrep.to_jsonable()["dim_K1_table"],
                "epsilon": mrep.epsilon,
                "l2_theorem_applicable": mrep.l2_theorem_applicable,
            },
            "provenance": [
                "moduli.dim_def_sl",
                "moduli.dim_def_sl_l2",
                "moduli.dim_K1",
            ],
        }

    if name == "cone":
        cman = man["cone"]
        specs = state.get("spectra") or _build_spectra(man, base)
        link = specs[0]
        profile = cone_solver.get_profile(
            cman["profile"], man["n"], link, **cman.get("params", {})
        )
        values: dict = {"profile": profile.name}
        prov = []
        if "deltas" in cman:
            rows = []
            lam_max = float(cman.get("lambda_max", link.truncation))
            T = float(cman.get("truncation", 80.0))
            ends = profile.end_spectra()
            for d in cman["deltas"]:
                shooting = cone_solver.bounded_harmonic_dim(profile, float(d), lam_max, T)
                counting = indicial.dim_H0(float(d), ends)
                rows.append(
                    {
                        "delta": float(d),
                        "shooting": shooting,
                        "counting": counting,
                        "agree": shooting == counting,
                    }
                )
            values["dimension_comparison"] = rows
            prov += ["cone_solver.bounded_harmonic_dim", "indicial.dim_H0"]
            bad = [r for r in rows if not r["agree"]]
            if bad:
                raise InternalConsistencyError(
                    f"shooting and counting dimensions disagree at delta = "
                    f"{bad[0]['delta']}: {bad[0]['shooting']} vs {bad[0]['counting']}"
                )
        if "glue" in cman:
            g = cman["glue"]
            res = cone_solver.glue_harmonic(
                profile, g["end_values"], T=float(g.get("truncation", 50.0))
            )
            values["glue"] = {
                "end_values": list(res.end_values),
                "value_at_zero": res.value_at_zero,
                "fitted_exponents": list(res.fitted_exponents),
                "expected_exponent": res.expected_exponent,
                "residual_norm": res.solution.residual_norm,
            }
            prov.append("cone_solver.glue_harmonic")
        if "probe" in cman:
            p = cman["probe"]
            res = cone_solver.fredholm_window_probe(
                profile,
                float(p.get("mode", 0.0)),
                p["deltas"],
                p.get("truncations", [50.0, 100.0, 200.0]),
                seed=seed,
            )
            values["probe"] = {
                "rows": res.table(),
                "slopes": {f"{k:g}": v for k, v in res.slopes.items()},
                "flags": {f"{k:g}": v for k, v in res.flags.items()},
                "kernel_alignment": {
                    f"{k:g}": v for k, v in res.kernel_alignment.items()
                },
            }
            prov.append("cone_solver.fredholm_window_probe")
        return {"inputs": cman, "values": values, "provenance": prov}

    if name == "geodesic":
        g = man["geometry"]
        chart = ac_geometry.get_chart(g["chart"], **g.get("params", {}))
        values: dict = {"chart": chart.name}
        prov = []
        if g.get("classify", True):
            values["christoffel_decay"] = decay = ac_geometry.decay_classify(
                chart, "christoffels"
            )
            values["riemann_decay"] = ac_geometry.decay_classify(chart, "riemann_norm")
            prov.append("ac_geometry.decay_classify")
        sweep = g.get("sweep")
        if sweep:
            V = ac_geometry.get_field(sweep.get("field", "sc_mixed"))
            Z = ac_geometry.sc_frame_vector(int(sweep.get("z_index", 1)))
            xs = sweep.get("xs", [1e-1, 1e-2, 1e-3, 1e-4])
            y = sweep.get("y", [1.0, 0.7])
            res = ac_geometry.jacobi_remainder_sweep(chart, V, Z, xs, y)
            values["remainder_sweep"] = {
                "rows": [dict(r) for r in res.rows],
                "slope": res.slope,
                "max_norm": res.max_norm,
            }
            values["pushforward_min_singular"] = ac_geometry.expv_min_singular(
                chart, V, xs, y
            )
            prov += [
                "ac_geometry.jacobi_remainder",
                "ac_geometry.expv_min_singular",
            ]
        return {"inputs": g, "values": values, "provenance": prov}

    raise ValidationError(f"unknown analysis {name!r}")


# --------------------------------------------------------------------------
# explain


def explain(report: dict, block: str) -> str:
    blocks = report.get("blocks", {})
    if block not in blocks:
        raise ValidationError(
            f"unknown block {block!r}; report has {sorted(blocks)}"
        )
    data = blocks[block]
    if "error" in data:
        return f"block {block}: failed with {data['error']['type']}: {data['error']['message']}"
    lines = [f"block: {block}"]
    values = data.get("values", {})
    if block == "moduli":
        inp = data.get("inputs", {})
        for key, formula in inp.get("formulas", {}).items():
            lines.append(f"  {key} = {formula}")
        lines.append(f"  dim K^1(eps) = {values.get('dim_K1_eps')}")
        for d, v in values.get("dim_K1_table", {}).items():
            lines.append(f"  dim K^1({d}) = {v}")
    elif block == "weights":
        lines.append("  weight   lambda   branch    end")
        for w in values.get("weights", []):
            for src in w["sources"]:
                lines.append(
                    f"  {w['weight']:+8.4f} {src['lambda']:8.4f} {src['branch']:>8s} {src['end']:5d}"
                )
    elif block == "cone":
        rows = values.get("dimension_comparison", [])
        if rows:
            lines.append("  delta   shooting   counting   agree")
            for r in rows:
                lines.append(
                    f"  {r['delta']:+6.2f} {r['shooting']:9d} {r['counting']:9d}   {r['agree']}"
                )
        if "glue" in values:
            gl = values["glue"]
            lines.append(
                f"  glue: F(0) = {gl['value_at_zero']:.8f}, fitted decay "
                f"{[round(e, 4) for e in gl['fitted_exponents']]} "
                f"(expected {gl['expected_exponent']})"
            )
        if "probe" in values:
            lines.append("  probe flags: " + json.dumps(values["probe"]["flags"]))
    else:
        for k, v in values.items():
            lines.append(f"  {k}: {json.dumps(v, sort_keys=True, default=str)}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# entry point


def _resolve_manifest(arg: str) -> tuple[dict, Path]:
    p = Path(arg)
    if p.exists():
        with open(p) as fh:
            return json.load(fh), p.parent
    name = arg if arg.endswith(".json") else arg + ".json"
    pkg_files = resources.files("acslm").joinpath("manifests")
    candidate = pkg_files.joinpath(name)
    if candidate.is_file():
        return json.loads(candidate.read_text()), Path.cwd()
    raise ValidationError(f"manifest {arg!r} not found on disk or in the registry")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="acslm",
        description="moduli dimensions of asymptotically conical special "
        "Lagrangian submanifolds, plus the numerical checks behind them",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a JSON manifest")
    p_run.add_argument("manifest", help="path or name of a packaged manifest")
    p_run.add_argument("--out", help="report output path (default: manifest's 'output' or stdout)")
    p_run.add_argument("--seed", type=int, default=None, help="seed for randomized probes")
    p_run.add_argument(
        "--timings",
        action="store_true",
        help="include per-block wall-clock times (breaks byte-for-byte determinism)",
    )
    p_explain = sub.add_parser("explain", help="render a report block as text")
    p_explain.add_argument("report")
    p_explain.add_argument("block")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            man, base = _resolve_manifest(args.manifest)
            report, code = run(man, base, seed=args.seed, timings=args.timings)
            text = json.dumps(report, sort_keys=True, indent=2) + "\n"
            out = args.out or man.get("output")
            if out:
                Path(out).write_text(text)
            else:
                sys.stdout.write(text)
            return code
        with open(args.report) as fh:
            report = json.load(fh)
        print(explain(report, args.block))
        return EXIT_OK
    except AcslmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
