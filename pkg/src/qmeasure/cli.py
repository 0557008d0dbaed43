"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 parse error, 3 semantic
error, 4 resource cap.
"""
from __future__ import annotations

import argparse
import cmath
import itertools
import json
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from . import histories, interpret, protocol, simulator, synth
from .errors import ConfigurationError, DomainError, PreclusionError, ResourceError
from .histories import Event, ExperimentConfig, chain_str
from .spinor import Direction

log = logging.getLogger("qmeasure")

MODES = ("measure", "simulate", "synth", "interfere", "classify", "table", "verify")

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_SEMANTIC, EXIT_RESOURCE = 0, 1, 2, 3, 4

PRESETS = {
    "paper-zx": ["Z", "X"],
    "random-walk-8": ["Z", "Y", "-Z", "-Y", "Z", "Y", "-Z", "-Y"],
}


class ParseError(Exception):
    """Malformed JSON or a field of the wrong shape."""


@dataclass
class RunSpec:
    config: ExperimentConfig
    events: list[Event] = field(default_factory=list)
    mode: str = "measure"
    tolerance: float = protocol.DEFAULT_TOLERANCE
    output: str = "text"
    seed: int = 0
    max_rows: int | None = None

    def to_dict(self) -> dict:
        d = {
            "initial": [[z.real, z.imag] for z in self.config.initial.tolist()],
            "analyzers": [[a.theta, a.phi] for a in self.config.analyzers],
            "events": [[chain_str(c) for c in e] for e in self.events],
            "mode": self.mode,
            "tolerance": self.tolerance,
            "output": self.output,
            "seed": self.seed,
        }
        if self.max_rows is not None:
            d["max_rows"] = self.max_rows
        return d


def parse_direction(item) -> Direction:
    if isinstance(item, str):
        try:
            return Direction.named(item)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
    if isinstance(item, (list, tuple)) and all(isinstance(v, (int, float)) for v in item):
        try:
            if len(item) == 2:
                return Direction(float(item[0]), float(item[1]))
            if len(item) == 3:
                return Direction.from_cartesian(*map(float, item))
        except ValueError as exc:
            raise ConfigurationError(f"analyzer {item!r}: {exc}") from None
    raise ParseError(f"analyzer {item!r} must be an alias, a [theta, phi] pair or an [x, y, z] triple")


def parse_complex(item) -> complex:
    if isinstance(item, (int, float)):
        return complex(item)
    if isinstance(item, (list, tuple)) and len(item) == 2 and all(isinstance(v, (int, float)) for v in item):
        return complex(float(item[0]), float(item[1]))
    raise ParseError(f"complex amplitude {item!r} must be a number or an [re, im] pair")


def normalize_initial(amps) -> np.ndarray:
    psi = np.array(amps, dtype=complex)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-6:
        raise ConfigurationError(f"initial state norm {norm!r} is not 1 (off by more than 1e-6)")
    if abs(norm - 1.0) > 1e-12:
        log.warning("initial state norm %r renormalized to 1", norm)
    return psi / norm


def random_config(n: int, rng: np.random.Generator) -> ExperimentConfig:
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    dirs = [Direction.from_cartesian(*rng.normal(size=3)) for _ in range(n)]
    return ExperimentConfig(psi, tuple(dirs))


def random_events(n: int, count: int, rng: np.random.Generator) -> list[Event]:
    out = []
    for _ in range(count):
        k = int(rng.integers(1, (1 << n) + 1))
        picks = rng.choice(1 << n, size=k, replace=False)
        out.append(Event((histories.index_chain(int(i), n) for i in picks), n=n))
    return out


def parse_events(raw, n: int) -> list[Event]:
    if isinstance(raw, str):
        raw = [part for part in raw.split(";")]
    if not isinstance(raw, list):
        raise ParseError("events must be a list of events or a 'c,c;c,c' string")
    events = []
    for item in raw:
        if isinstance(item, str):
            chains = [c.strip() for c in item.strip().strip("{}").split(",") if c.strip()]
        elif isinstance(item, list) and all(isinstance(c, str) for c in item):
            chains = item
        else:
            raise ParseError(f"event {item!r} must be a list of bit strings")
        for c in chains:
            if any(ch not in "01" for ch in c) or not c:
                raise ParseError(f"chain {c!r} is not a bit string")
            if len(c) != n:
                raise ConfigurationError(f"chain length mismatch: {c!r} has {len(c)} bits, config has {n} analyzers")
        events.append(Event(chains, n=n))
    return events


def _resolve_analyzers(preset, analyzers, seed):
    """Return (directions, default initial state or None)."""
    if analyzers is not None:
        if not isinstance(analyzers, list) or not analyzers:
            raise ParseError("analyzers must be a non-empty list")
        return [parse_direction(a) for a in analyzers], None
    if preset is None:
        raise ConfigurationError("either a preset or an analyzer list is required")
    if preset in PRESETS:
        return [Direction.named(a) for a in PRESETS[preset]], None
    if preset.startswith("random-"):
        try:
            n = int(preset.split("-", 1)[1])
        except ValueError:
            raise ConfigurationError(f"unknown preset {preset!r}") from None
        if n < 1:
            raise ConfigurationError("random preset needs at least one analyzer")
        simulator.check_size(n)
        cfg = random_config(n, np.random.default_rng(seed))
        return list(cfg.analyzers), cfg.initial
    raise ConfigurationError(f"unknown preset {preset!r}; known: {sorted(PRESETS)} or random-N")


def build_spec(data: dict) -> RunSpec:
    """Validate a decoded config dictionary into a :class:`RunSpec`."""
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object")
    known = {"preset", "analyzers", "initial", "events", "mode", "tolerance", "output", "seed", "max_rows"}
    unknown = set(data) - known
    if unknown:
        raise ParseError(f"unknown config field(s): {sorted(unknown)}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ParseError("field 'seed' must be an integer")
    dirs, default_initial = _resolve_analyzers(data.get("preset"), data.get("analyzers"), seed)
    if "initial" in data:
        raw = data["initial"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise ParseError("field 'initial' must be two complex amplitudes")
        initial = normalize_initial([parse_complex(a) for a in raw])
    elif default_initial is not None:
        initial = default_initial
    else:
        initial = np.array([1.0, 0.0], dtype=complex)
    cfg = ExperimentConfig(initial, tuple(dirs))

    mode = data.get("mode", "measure")
    if mode not in MODES:
        raise ParseError(f"field 'mode' must be one of {MODES}, got {mode!r}")
    output = data.get("output", "text")
    if output not in ("text", "json"):
        raise ParseError(f"field 'output' must be 'text' or 'json', got {output!r}")
    tol = data.get("tolerance", protocol.DEFAULT_TOLERANCE)
    if not isinstance(tol, (int, float)) or not tol > 0:
        raise ParseError("field 'tolerance' must be a positive number")
    max_rows = data.get("max_rows")
    if max_rows is not None and (not isinstance(max_rows, int) or max_rows < 0):
        raise ParseError("field 'max_rows' must be a non-negative integer")
    events = parse_events(data.get("events", []), cfg.n)
    return RunSpec(cfg, events, mode, float(tol), output, seed, max_rows)


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return data


def parse_config(path) -> RunSpec:
    """Read and validate a JSON run configuration file."""
    return build_spec(_load_json(path))


# ---------------------------------------------------------------- commands


def _event_label(e: Event) -> str:
    return str(e) if len(e) else "{}"


def cmd_measure(spec: RunSpec) -> tuple[dict, int]:
    rows = []
    for e in spec.events:
        if not len(e):
            rows.append({"event": _event_label(e), "k": 0, "probability": 0.0, "inferred_measure": 0.0,
                         "oracle_measure": 0.0, "residual": 0.0})
            continue
        r = protocol.measure_the_measure(spec.config, e, tolerance=spec.tolerance)
        rows.append({"event": _event_label(e), "k": r.cardinality, "probability": r.probability,
                     "inferred_measure": r.inferred_measure, "oracle_measure": r.oracle_measure,
                     "residual": r.residual})
    return {"mode": "measure", "seed": spec.seed, "rows": rows}, EXIT_OK


def cmd_simulate(spec: RunSpec) -> tuple[dict, int]:
    state = simulator.run_coupled(spec.config)
    n = spec.config.n
    amps = []
    for p in range(2):
        for a in range(1 << n):
            z = state.amplitude(p, a)
            if abs(z) > 1e-15:
                amps.append({"particle": p, "ancillas": chain_str(histories.index_chain(a, n)),
                             "amplitude": [z.real, z.imag]})
    rho = simulator.reduced_density(state)
    report = {"mode": "simulate", "seed": spec.seed, "n": n, "amplitudes": amps,
              "reduced_density": [[[z.real, z.imag] for z in row] for row in rho.tolist()]}
    posts = []
    for e in spec.events:
        try:
            psi = protocol.post_measurement_particle_state(spec.config, e)
            posts.append({"event": _event_label(e), "particle_state": [[z.real, z.imag] for z in psi.tolist()]})
        except PreclusionError as exc:
            posts.append({"event": _event_label(e), "precluded": str(exc)})
    report["post_measurement"] = posts
    return report, EXIT_OK


def cmd_synth(spec: RunSpec) -> tuple[dict, int]:
    plans = []
    for e in spec.events:
        if not len(e):
            continue
        entry = {"event": _event_label(e), "k": len(e), "alpha_bounds": list(synth.alpha_bounds(len(e), spec.config.n))}
        plan = synth.plan_measurement(e, spec.config.n)
        if isinstance(plan, synth.GatePlan):
            entry["route"] = "boolean-sum"
            entry["plan"] = plan.to_dict()
            entry["alpha"] = plan.alpha
        else:
            entry["route"] = "subspace-fourier"
            entry["target"] = chain_str(synth.fourier_target(e))
        plans.append(entry)
    return {"mode": "synth", "seed": spec.seed, "plans": plans}, EXIT_OK


def cmd_interfere(spec: RunSpec) -> tuple[dict, int]:
    order = len(spec.events)
    rep = histories.interference(spec.config, spec.events, order)
    return {"mode": "interfere", "seed": spec.seed, "order": rep.order, "value": rep.value,
            "events": [_event_label(e) for e in spec.events]}, EXIT_OK


def cmd_classify(spec: RunSpec) -> tuple[dict, int]:
    """Classify every outcome of the Fourier-basis measurement, plus |E> and |Ebar>."""
    n = spec.config.n
    out = []
    for e in spec.events:
        if not len(e):
            continue
        u_dag = synth.subspace_fourier(e, n).adjoint()
        outcomes = []
        for idx in range(1 << n):
            basis = np.zeros(1 << n, dtype=complex)
            basis[idx] = 1.0
            vec = u_dag.apply(basis)
            cls = interpret.classify_outcome(spec.config, e, simulator.AncillaProjector(n, vector=vec))
            row = cls.to_dict()
            row["outcome"] = chain_str(histories.index_chain(idx, n))
            outcomes.append(row)
        entry = {"event": _event_label(e), "fourier_outcomes": outcomes,
                 "event_state": interpret.classify_outcome(spec.config, e, protocol.event_state(e, n)).to_dict()}
        if len(e) < 1 << n:
            entry["complement_state"] = interpret.classify_outcome(
                spec.config, e, protocol.complement_state(e, n)).to_dict()
        out.append(entry)
    return {"mode": "classify", "seed": spec.seed, "events": out}, EXIT_OK


def _lazy_events(n: int):
    chains = list(itertools.product((0, 1), repeat=n))
    for k in range(len(chains) + 1):
        for combo in itertools.combinations(chains, k):
            yield Event(combo, n=n)


def cmd_table(spec: RunSpec) -> tuple[dict, int]:
    cfg = spec.config
    n = cfg.n
    simulator.check_size(n)
    amps = []
    for idx in range(1 << n):
        chain = histories.index_chain(idx, n)
        a = histories.amplitude(cfg, chain)
        amps.append({"chain": chain_str(chain), "modulus": abs(a), "phase": cmath.phase(a) if a else 0.0,
                     "amplitude": [a.real, a.imag]})
    if n > 2 and spec.max_rows is None:
        raise ResourceError(f"the measure table has 2^{1 << n} rows for n={n}; pass --max-rows")
    rows = []
    limit = spec.max_rows
    for e in itertools.islice(_lazy_events(n), limit):
        rows.append({"event": _event_label(e), "measure": histories.measure(cfg, e)})
    return {"mode": "table", "seed": spec.seed, "amplitudes": amps, "measures": rows}, EXIT_OK


def _corrupt(plan: synth.GatePlan) -> synth.GatePlan:
    """Deliberately wrong plan for the harness self-test."""
    for p in range(plan.n):
        if plan.bases[p] == "Z":
            plan.expected[p] ^= 1
            return plan
    vec = np.zeros_like(plan.residual_vector)
    vec[int(np.argmax(np.abs(plan.residual_vector)))] = 1.0
    plan.residual_vector = vec
    return plan


def cmd_verify(spec: RunSpec, corrupt: bool = False) -> tuple[dict, int]:
    cfg = spec.config
    rows = []
    failures = 0
    for e in sorted(spec.events, key=Event.sort_key):
        oracle = histories.measure(cfg, e) if len(e) else 0.0
        if not len(e):
            routes = {"protocol": 0.0, "plan": 0.0, "fourier": 0.0}
        else:
            plan = synth.boolean_sum_plan(e, cfg.n)
            if corrupt:
                plan = _corrupt(plan)
            routes = {
                "protocol": protocol.measure_the_measure(cfg, e).inferred_measure,
                "plan": synth.execute_plan(cfg, plan, e).inferred_measure,
                "fourier": synth.execute_plan(cfg, synth.subspace_fourier(e, cfg.n), e).inferred_measure,
            }
        residuals = {name: abs(v - oracle) for name, v in routes.items()}
        ok = all(r < spec.tolerance for r in residuals.values())
        failures += not ok
        rows.append({"event": _event_label(e), "oracle_measure": oracle, "inferred": routes,
                     "residuals": residuals, "pass": ok})
    report = {"mode": "verify", "seed": spec.seed, "tolerance": spec.tolerance, "events": len(rows),
              "failures": failures, "rows": rows}
    return report, EXIT_OK if failures == 0 else EXIT_VERIFY


# ---------------------------------------------------------------- rendering


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return " ".join(f"{k}={_fmt(x)}" for k, x in v.items())
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def render_text(report: dict) -> str:
    lines = [f"# mode={report['mode']} seed={report['seed']}"]
    for key, value in report.items():
        if key in ("mode", "seed"):
            continue
        if isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{key}:")
            for row in value:
                lines.append("  " + _fmt(row))
        else:
            lines.append(f"{key}: {_fmt(value)}")
    return "\n".join(lines)


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmeasure", description="Quantum measure of path events and the ancilla protocol.")
    p.add_argument("--config", metavar="FILE", help="JSON run configuration")
    p.add_argument("--preset", help="paper-zx, random-walk-8 or random-N")
    p.add_argument("--initial", help="initial amplitudes 'a0,a1' (Python complex literals)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--output", choices=("text", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--max-rows", type=int)
    p.add_argument("--events", help="semicolon-separated events of comma-separated chains, e.g. '00,10;01,11'")
    p.add_argument("--random-events", type=int, metavar="K", help="add K random events (seeded)")
    p.add_argument("--corrupt-test", action="store_true", help="corrupt synthesized plans (verify self-test)")
    return p


def spec_from_args(args) -> RunSpec:
    data = _load_json(args.config) if args.config else {}
    if args.preset:
        data["preset"] = args.preset
        data.pop("analyzers", None)
    if args.initial:
        try:
            data["initial"] = [[complex(s).real, complex(s).imag] for s in args.initial.split(",")]
        except ValueError:
            raise ParseError(f"--initial {args.initial!r} must be two complex literals") from None
    for key in ("mode", "tolerance", "output", "seed", "max_rows"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.events is not None:
        data["events"] = args.events
    if "preset" not in data and "analyzers" not in data:
        raise ConfigurationError("give --config or --preset")
    spec = build_spec(data)
    if args.random_events:
        spec.events += random_events(spec.config.n, args.random_events, np.random.default_rng(spec.seed + 1))
    if not spec.events and spec.mode in ("measure", "synth", "classify", "verify"):
        if spec.config.n > 3:
            raise ConfigurationError("no events given; use --events or --random-events for n > 3")
        spec.events = list(histories.all_events(spec.config.n))
    return spec


def run(spec: RunSpec, corrupt: bool = False) -> tuple[dict, int]:
    handlers = {
        "measure": cmd_measure,
        "simulate": cmd_simulate,
        "synth": cmd_synth,
        "interfere": cmd_interfere,
        "classify": cmd_classify,
        "table": cmd_table,
    }
    if spec.mode == "verify":
        return cmd_verify(spec, corrupt)
    return handlers[spec.mode](spec)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        report, code = run(spec, corrupt=args.corrupt_test)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigurationError, DomainError, PreclusionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    if spec.output == "json":
        print(json.dumps(report, indent=2))
    else:
        print(render_text(report))
    if code == EXIT_VERIFY:
        bad = [r for r in report["rows"] if not r["pass"]]
        for r in bad[:10]:
            print(f"FAIL {r['event']}: oracle={r['oracle_measure']!r} inferred={r['inferred']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
