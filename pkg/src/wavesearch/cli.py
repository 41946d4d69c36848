"""Command-line front end.

Usage::

    wavesearch [--config run.json] grover --n 100 --target 3
    wavesearch wave run --n 16 --target 0 --q 3
    wavesearch quantum frames --alpha -2 --frames 16
    wavesearch experiment damping --values 0,1e-3,1e-2

Flags override values read from ``--config``.  Output files go to
``--output-dir``, else ``$WAVESEARCH_OUTPUT_DIR``, else the working
directory.  Failures print one JSON line on stderr and exit with 1 (usage),
2 (validation), 3 (numerical precondition, e.g. a mistimed tap) or 4 (I/O).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import coherent, engine, experiments, outputs, search
from . import oscillators as osc
from .errors import (
    DegenerateStateError,
    InvalidParameterError,
    MistimedTapError,
    TargetIndexError,
    UnsupportedModeError,
)

__all__ = ["RunConfig", "ConfigError", "parse_config", "run_command", "main"]

OUTPUT_ENV = "WAVESEARCH_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3, 4

ACTIONS = {
    "grover": (None,),
    "wave": ("run", "reverse", "random-stop"),
    "quantum": ("evolve", "frames"),
    "experiment": ("damping", "scaling", "detuning", "rate"),
}


class ConfigError(ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    action: str | None = None
    n: int | None = None
    target: tuple | None = None
    family: str | None = None
    p: int = 1
    a: float = 1.0
    q: int | None = None
    gamma: float = 0.0
    dt: float | None = None
    step: float = 1e-3
    seed: int = 0
    trials: int | None = None
    method: str = "exact"
    variant: str = "standard"
    samples: int = 1
    alpha: complex | None = None
    frames: int = 16
    points: int = 201
    values: tuple | None = None
    e_b: float | None = None
    kt: float | None = None
    e_f: float = 0.0
    output_dir: str | None = None

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, complex):
                v = [v.real, v.imag]
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def resolved_family(self) -> str:
        if self.family is not None:
            return self.family
        # anchored big oscillator keeps the lab-frame target energy meaningful
        return "A" if self.action == "detuning" else "B"


_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}
_INT_FIELDS = {"n", "p", "q", "seed", "trials", "samples", "frames", "points"}
_FLOAT_FIELDS = {"a", "gamma", "dt", "step", "e_b", "kt", "e_f"}


def _as_int(name, v):
    if isinstance(v, bool):
        raise ConfigError(f"{name} must be an integer, got {v!r}", name)
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {v!r}", name) from None
    if not math.isfinite(f) or f != int(f):
        raise ConfigError(f"{name} must be an integer, got {v!r}", name)
    return int(f)


def _as_float(name, v):
    if isinstance(v, bool):
        raise ConfigError(f"{name} must be a number, got {v!r}", name)
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {v!r}", name) from None
    if not math.isfinite(f):
        raise ConfigError(f"{name} must be finite, got {v!r}", name)
    return f


def _as_complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(_as_float("alpha", v[0]), _as_float("alpha", v[1]))
    if isinstance(v, dict):
        return complex(_as_float("alpha", v.get("re", 0)), _as_float("alpha", v.get("im", 0)))
    try:
        return complex(str(v).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"alpha must be a complex number, got {v!r}", "alpha") from None


def _as_list(v, name):
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    if not isinstance(v, (list, tuple)):
        v = [v]
    return v


def _coerce(raw: dict) -> dict:
    out = {}
    for key, v in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", key)
        if v is None:
            out[key] = None
        elif key in _INT_FIELDS:
            out[key] = _as_int(key, v)
        elif key in _FLOAT_FIELDS:
            out[key] = _as_float(key, v)
        elif key == "target":
            out[key] = tuple(_as_int("target", t) for t in _as_list(v, key))
        elif key == "values":
            out[key] = tuple(_as_float("values", t) for t in _as_list(v, key))
        elif key == "alpha":
            out[key] = _as_complex(v)
        elif key == "family":
            out[key] = str(v).upper()
        else:
            out[key] = str(v)
    return out


def _require(cfg, name, bound):
    if getattr(cfg, name) is None:
        raise ConfigError(f"missing required field {name!r} ({bound})", name)


def _check(cond, name, bound, value):
    if not cond:
        raise ConfigError(f"{name}={value!r} out of range: {bound}", name)


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in ACTIONS:
        raise ConfigError(f"unknown command {cfg.command!r}", "command")
    if cfg.action not in ACTIONS[cfg.command]:
        raise ConfigError(f"command {cfg.command!r} has no action {cfg.action!r}", "action")
    if cfg.family is not None:
        _check(cfg.family in ("A", "B"), "family", "must be A or B", cfg.family)
    _check(cfg.p >= 1, "p", "must be >= 1", cfg.p)
    _check(cfg.gamma >= 0, "gamma", "must be >= 0", cfg.gamma)
    _check(cfg.step > 0, "step", "must be > 0", cfg.step)
    _check(cfg.seed >= 0, "seed", "must be >= 0", cfg.seed)
    _check(cfg.samples >= 1, "samples", "must be >= 1", cfg.samples)
    _check(cfg.frames >= 1, "frames", "must be >= 1", cfg.frames)
    _check(cfg.points >= 2, "points", "must be >= 2", cfg.points)
    _check(cfg.method in ("exact", "numeric"), "method", "must be exact or numeric", cfg.method)
    _check(cfg.variant in ("standard", "complement"), "variant", "must be standard or complement", cfg.variant)
    if cfg.q is not None:
        _check(cfg.q >= 0, "q", "must be >= 0", cfg.q)
    if cfg.trials is not None:
        _check(cfg.trials >= 1, "trials", "must be >= 1", cfg.trials)
    if cfg.dt is not None:
        _check(cfg.dt > 0, "dt", "must be > 0", cfg.dt)
    if cfg.command in ("grover", "wave"):
        _require(cfg, "n", "a positive integer")
        _require(cfg, "target", "an index in [0, n)")
    if cfg.n is not None:
        low = 1 if cfg.command == "grover" else 2
        _check(cfg.n >= low, "n", f"must be >= {low}", cfg.n)
    if cfg.target is not None:
        n = cfg.n if cfg.n is not None else 4
        _check(len(cfg.target) >= 1, "target", "needs at least one index", cfg.target)
        for t in cfg.target:
            _check(0 <= t < n, "target", f"must lie in [0, {n - 1}]", t)
    if cfg.command == "wave" and cfg.gamma > 0 and cfg.method == "exact":
        raise ConfigError("gamma > 0 requires method 'numeric'", "method")
    if cfg.command == "quantum":
        _require(cfg, "alpha", "a complex number")
        if cfg.action == "frames":
            _check(cfg.alpha != 0, "alpha", "must be nonzero for tapped frames", cfg.alpha)
    if cfg.command == "experiment":
        if cfg.action == "rate":
            _require(cfg, "e_b", "barrier energy > 0")
            _require(cfg, "kt", "thermal energy > 0")
            _check(cfg.e_b > 0, "e_b", "must be > 0", cfg.e_b)
            _check(cfg.kt > 0, "kt", "must be > 0", cfg.kt)
            _check(cfg.e_f >= 0, "e_f", "must be >= 0", cfg.e_f)
        else:
            if cfg.values is not None:
                _check(len(cfg.values) >= 1, "values", "must be non-empty", cfg.values)
                if cfg.action == "damping":
                    _check(min(cfg.values) >= 0, "values", "gamma values must be >= 0", cfg.values)
                else:
                    _check(min(cfg.values) > 0, "values", "must be > 0", cfg.values)
    return cfg


def parse_config(source=None, overrides=None) -> RunConfig:
    """Build a validated :class:`RunConfig`.

    ``source`` is a JSON document (str or mapping) or None; ``overrides``
    holds flag values that replace keys from ``source``.
    """
    raw = {}
    if source is not None:
        if isinstance(source, (str, bytes)):
            try:
                raw = json.loads(source)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc.msg}") from None
        else:
            raw = dict(source)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    raw = dict(raw)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "command" not in raw:
        raise ConfigError("missing required field 'command'", "command")
    values = _coerce(raw)
    if values.get("command") == "grover":
        values.setdefault("action", None)
    return _validate(RunConfig(**values))


# ---------------------------------------------------------------- dispatch


def _output_dir(cfg):
    return Path(cfg.output_dir or os.environ.get(OUTPUT_ENV) or ".")


def _stem(cfg):
    return cfg.command if cfg.action is None else f"{cfg.command}_{cfg.action.replace('-', '_')}"


def _summary(cfg, results):
    # the output location is left out so results do not depend on where they land
    echo = {k: v for k, v in cfg.to_dict().items() if k != "output_dir"}
    return {"command": cfg.command, "action": cfg.action, "config": echo,
            "seed": cfg.seed, "results": results}


def _targets(cfg):
    return cfg.target[0] if len(cfg.target) == 1 else list(cfg.target)


def _run_grover(cfg, out):
    plan = search.optimal_queries(cfg.n)
    q = plan.q_optimal if cfg.q is None else cfg.q
    state, trace = search.grover_iterate(cfg.n, _targets(cfg), q)
    k = len(cfg.target)
    closed = search.closed_form_overlap(cfg.n, np.arange(q + 1), k)
    results = {
        "n_items": cfg.n, "theta": plan.theta, "q_optimal": plan.q_optimal,
        "q_real": plan.q_real, "overlap": plan.predicted_overlap, "exact": plan.exact,
        "q_run": q, "final_overlap": float(trace[-1]),
        "classical_memoryless": search.classical_baseline(cfg.n, False),
        "classical_with_memory": search.classical_baseline(cfg.n, True),
    }
    if cfg.trials is not None:
        for mem in (False, True):
            counts = search.simulate_classical_search(cfg.n, mem, cfg.trials, cfg.seed)
            results["simulated_" + ("with_memory" if mem else "memoryless")] = float(counts.mean())
    files = [
        outputs.write_csv(out / "grover_trace.csv", ["q", "overlap", "closed_form"],
                          zip(range(q + 1), trace, closed)),
        outputs.write_json(out / "grover_summary.json", _summary(cfg, results)),
    ]
    return files


def _params(cfg, damping=0.0):
    return osc.family_params(cfg.resolved_family, cfg.p, cfg.n, damping)


def _run_wave(cfg, out):
    params = _params(cfg, cfg.gamma)
    stem = _stem(cfg)
    common = dict(method=cfg.method, step_size=cfg.step, variant=cfg.variant,
                  interval=cfg.dt, samples_per_interval=cfg.samples)
    if cfg.gamma > 0 and cfg.dt is None:
        common["interval"] = engine.tap_interval(_params(cfg))
    k = len(cfg.target)
    q = search.optimal_queries(cfg.n, k).q_optimal if cfg.q is None else cfg.q
    if cfg.action == "random-stop":
        trials = 100_000 if cfg.trials is None else cfg.trials
        ratio, info = engine.random_stop_gain(params, _targets(cfg), trials, cfg.seed,
                                              amplitude=cfg.a, method=cfg.method, return_details=True)
        results = {"ratio": ratio, "trials": trials, "mean_fraction": info["mean_fraction"],
                   "max_fraction": info["max_fraction"], "horizon": info["horizon"]}
        return [outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, results))]
    if cfg.action == "run":
        traj, report = engine.run_search(params, _targets(cfg), amplitude=cfg.a, queries=q, **common)
        results = {"max_gain": report.max_gain, "realized_gain": report.realized_gain,
                   "stop_time": report.stop_time, "final_target_fraction": float(traj.target_fraction[-1]),
                   "predicted_fraction": float(search.closed_form_overlap(cfg.n, q, k)),
                   "queries": q}
    else:
        traj = engine.run_reverse(params, _targets(cfg), q, cfg.a, **common)
        fr = traj.kinetic_fractions(-1)
        results = {"queries": q, "final_fractions": fr.tolist(),
                   "max_deviation_from_uniform": float(np.max(np.abs(fr - 1.0 / cfg.n)))}
    columns, rows = outputs.trajectory_table(traj, params)
    return [
        outputs.write_csv(out / f"{stem}_trajectory.csv", columns, rows),
        outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, results)),
    ]


def _run_quantum(cfg, out):
    omega = 1.0
    period = 2 * math.pi / omega
    times = np.arange(cfg.frames + 1) * period / cfg.frames
    stem = _stem(cfg)
    if cfg.action == "evolve":
        st = coherent.CoherentState(cfg.alpha, omega)
        rows = []
        for t in times:
            s = coherent.evolve_coherent(st, t)
            e = coherent.expectations(s)
            rows.append([t, s.alpha.real, s.alpha.imag, e.x, e.p, e.energy, s.global_phase])
        results = {"delta_x": st.delta_x, "delta_p": st.delta_p, "energy": st.energy}
        return [
            outputs.write_csv(out / f"{stem}.csv",
                              ["t", "re_alpha", "im_alpha", "x_mean", "p_mean", "energy", "global_phase"], rows),
            outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, results)),
        ]
    tapped = coherent.tapped_state(cfg.alpha, omega)
    dx = tapped.base.delta_x
    half = 2 * dx * abs(cfg.alpha) + 6 * dx
    xs = np.linspace(-half, half, cfg.points if cfg.points % 2 else cfg.points + 1)
    rows, wall = [], 0.0
    for k, t in enumerate(times):
        s = tapped.evolve(t)
        at_wall = abs(complex(coherent.tapped_wavefunction_at(s, 0.0)))
        wall = max(wall, at_wall)
        psi = coherent.tapped_wavefunction_at(s, xs)
        for x, v in zip(xs, psi):
            rows.append([k, t, x, v.real, v.imag, abs(v) ** 2, at_wall])
    results = {"normalization": tapped.normalization, "max_abs_psi_at_wall": wall,
               "frames": cfg.frames, "points": xs.size}
    return [
        outputs.write_csv(out / f"{stem}.csv",
                          ["frame", "t", "x", "re_psi", "im_psi", "abs2", "abs_psi_wall"], rows),
        outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, results)),
    ]


_DEFAULT_GRIDS = {
    "damping": (0.0, 1e-3, 1e-2, 2e-2),
    "scaling": (2.0,),
    "detuning": (1.0, 1.1, 1.25, 1.5, 2.0, 4.0, 8.0),
}


def _run_experiment(cfg, out):
    stem = _stem(cfg)
    if cfg.action == "rate":
        inputs = experiments.RateInputs(cfg.e_b, cfg.kt, cfg.e_f)
        results = {"enhancement": experiments.rate_enhancement(inputs),
                   "model": "exp(min(E_f, E_b) / kT)"}
        return [outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, results))]
    param = {"damping": "gamma", "scaling": "alpha", "detuning": "detune"}[cfg.action]
    spec = experiments.SweepSpec(
        param, cfg.values or _DEFAULT_GRIDS[cfg.action], n_items=cfg.n or 4,
        family=cfg.resolved_family, p=cfg.p, amplitude=cfg.a, queries=cfg.q,
        target=cfg.target[0] if cfg.target else 0, seed=cfg.seed, trials=cfg.trials or 1,
        step_size=cfg.step,
    )
    if cfg.action == "scaling":
        columns = ["alpha", "max_deviation", "identical", "trial", "argmax_oscillator", "target_fraction"]
        rows, summary = [], []
        for alpha in spec.values:
            rep = experiments.scaling_check(alpha, spec)
            summary.append({"alpha": alpha, "max_deviation": rep.max_deviation, "identical": rep.identical,
                            "target_is_max_rate": rep.target_is_max_rate})
            for i, (w, f) in enumerate(zip(rep.argmax_oscillator, rep.target_fraction)):
                rows.append([alpha, rep.max_deviation, rep.identical, i, w, f])
        files = [outputs.write_csv(out / f"{stem}.csv", columns, rows)]
        files.append(outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, {"points": summary})))
        return files
    table = experiments.damping_sweep(spec) if cfg.action == "damping" else experiments.detuning_sweep(spec)
    results = {"columns": list(table.columns), "rows": [list(r) for r in table.rows]}
    return [
        outputs.write_csv(out / f"{stem}.csv", table.columns, table.rows),
        outputs.write_json(out / f"{stem}_summary.json", _summary(cfg, results)),
    ]


_RUNNERS = {"grover": _run_grover, "wave": _run_wave, "quantum": _run_quantum,
            "experiment": _run_experiment}


def _error_line(kind, code, exc, field=None):
    payload = {"error": kind, "exit_code": code, "message": str(exc)}
    if field:
        payload["field"] = field
    return json.dumps(payload, sort_keys=True)


def run_command(cfg: RunConfig, stderr=None):
    """Execute ``cfg``; return (exit status, list of written paths)."""
    stderr = sys.stderr if stderr is None else stderr
    try:
        files = _RUNNERS[cfg.command](cfg, _output_dir(cfg))
    except MistimedTapError as exc:
        print(_error_line("numerical", EXIT_NUMERICAL, exc, "dt"), file=stderr)
        return EXIT_NUMERICAL, []
    except (UnsupportedModeError, DegenerateStateError) as exc:
        print(_error_line("numerical", EXIT_NUMERICAL, exc), file=stderr)
        return EXIT_NUMERICAL, []
    except (InvalidParameterError, TargetIndexError, ConfigError) as exc:
        print(_error_line("validation", EXIT_VALIDATION, exc, getattr(exc, "field", None)), file=stderr)
        return EXIT_VALIDATION, []
    except outputs.OutputError as exc:
        print(_error_line("io", EXIT_IO, exc, exc.path), file=stderr)
        return EXIT_IO, []
    return EXIT_OK, files


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_flags(p):
    S = argparse.SUPPRESS
    p.add_argument("--n", type=str, default=S, help="number of items N")
    p.add_argument("--target", type=str, default=S, help="target index, or comma list")
    p.add_argument("--family", type=str, default=S, help="parameter family A or B")
    p.add_argument("--p", type=str, default=S, help="family index p >= 1")
    p.add_argument("--a", "--amplitude", dest="a", type=str, default=S, help="initial velocity A")
    p.add_argument("--q", type=str, default=S, help="number of taps / iterations")
    p.add_argument("--gamma", type=str, default=S, help="damping rate")
    p.add_argument("--dt", type=str, default=S, help="tap interval override")
    p.add_argument("--step", type=str, default=S, help="integrator step size")
    p.add_argument("--seed", type=str, default=S)
    p.add_argument("--trials", type=str, default=S)
    p.add_argument("--method", type=str, default=S, help="exact or numeric")
    p.add_argument("--variant", type=str, default=S, help="standard or complement")
    p.add_argument("--samples", type=str, default=S, help="samples per tap interval")
    p.add_argument("--alpha", type=str, default=S, help="coherent-state label, e.g. -2 or 1+0.5j")
    p.add_argument("--frames", type=str, default=S)
    p.add_argument("--points", type=str, default=S)
    p.add_argument("--values", type=str, default=S, help="comma-separated sweep grid")
    p.add_argument("--e-b", dest="e_b", type=str, default=S)
    p.add_argument("--kt", type=str, default=S)
    p.add_argument("--e-f", dest="e_f", type=str, default=S)
    p.add_argument("--output-dir", dest="output_dir", type=str, default=S)


def build_parser():
    parser = _Parser(prog="wavesearch", description="Wave and quantum database search simulator")
    parser.add_argument("--config", type=str, default=None, help="JSON run configuration")
    parser.add_argument("--timing", action="store_true", help="report wall time on stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    g = sub.add_parser("grover", help="abstract amplitude search")
    _add_flags(g)
    for cmd, actions in ACTIONS.items():
        if cmd == "grover":
            continue
        c = sub.add_parser(cmd)
        inner = c.add_subparsers(dest="action", parser_class=_Parser)
        for act in actions:
            _add_flags(inner.add_parser(act))
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = vars(build_parser().parse_args(argv))
    except UsageError as exc:
        print(_error_line("usage", EXIT_USAGE, exc), file=sys.stderr)
        return EXIT_USAGE
    config_path = ns.pop("config")
    timing = ns.pop("timing")
    if ns.get("command") is None:
        print(_error_line("usage", EXIT_USAGE, "a command is required"), file=sys.stderr)
        return EXIT_USAGE
    if ns["command"] != "grover" and ns.get("action") is None:
        print(_error_line("usage", EXIT_USAGE, f"{ns['command']} needs an action"), file=sys.stderr)
        return EXIT_USAGE
    try:
        source = Path(config_path).read_text(encoding="utf-8") if config_path else None
        file_cmd = json.loads(source).get("command") if source else None
        if file_cmd is not None and file_cmd != ns["command"]:
            raise ConfigError(f"config command {file_cmd!r} does not match {ns['command']!r}", "command")
        cfg = parse_config(source, ns)
    except OSError as exc:
        print(_error_line("io", EXIT_IO, exc, config_path), file=sys.stderr)
        return EXIT_IO
    except (ConfigError, json.JSONDecodeError, AttributeError) as exc:
        print(_error_line("validation", EXIT_VALIDATION, exc, getattr(exc, "field", None)), file=sys.stderr)
        return EXIT_VALIDATION
    start = time.perf_counter()
    status, files = run_command(cfg)
    if status == EXIT_OK:
        for f in files:
            print(f)
        if timing:
            print(json.dumps({"wall_time_s": time.perf_counter() - start}), file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
