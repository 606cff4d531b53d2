"""
Configuration files, snapshots, run manifests and the command-line interface.

Config files are ``key = value`` lines, optionally grouped under ``[section]``
headers, with ``#`` comments::

    [grid]
    n_points = 1024
    domain_length = 400
    [time]
    dt = 0.1
    t_end = 20

Snapshot layout (little-endian): ``b"SQGF"``, ``u32`` version (1), ``u64`` N,
``f64`` L, ``f64`` t, then N ``(re, im)`` ``f64`` pairs of profile
coefficients in FFT storage order.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import difflib
import hashlib
import io
import json
import os
import struct
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .spectral_core import FourierGrid, SpectralField

__all__ = [
    "ConfigError",
    "SnapshotError",
    "RunManifest",
    "CONFIG_SECTIONS",
    "parse_config",
    "parse_config_text",
    "serialize_config",
    "config_hash",
    "write_snapshot",
    "read_snapshot",
    "atomic_write_text",
    "build_parser",
    "main",
]

MAGIC = b"SQGF"
VERSION = 1
_HEADER = struct.Struct("<4sIQdd")

CONFIG_SECTIONS = {
    "grid": ("n_points", "domain_length"),
    "time": ("dt", "t_end", "output_stride"),
    "initial": ("profile", "amplitude", "width", "carrier", "snapshot_path"),
    "model": ("n_max", "nonlinear"),
    "monitor": (
        "diagnostics",
        "guard_fraction",
        "guard_tol",
        "sobolev_index",
        "energy_index",
        "z_index",
        "drift_limit",
        "tblog_limit",
    ),
    "run": ("seed",),
}


class ConfigError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


def _sim_config_cls():
    from .evolution import SimConfig

    return SimConfig


def _convert(key: str, raw: str, default):
    text = raw.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or default is None and key != "snapshot_path":
            return None if text.lower() == "none" else float(text)
        if isinstance(default, tuple):
            return tuple(s.strip() for s in text.split(",") if s.strip())
        return None if text.lower() == "none" else text
    except ValueError:
        kind = type(default).__name__ if default is not None else "float"
        raise ConfigError(f"key {key!r}: cannot read {raw.strip()!r} as {kind}") from None


def parse_config_text(text: str, *, source: str = "<string>"):
    cls = _sim_config_cls()
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    key_section = {k: s for s, keys in CONFIG_SECTIONS.items() for k in keys}
    section = None
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in CONFIG_SECTIONS:
                near = difflib.get_close_matches(section, CONFIG_SECTIONS, n=1)
                hint = f"; did you mean [{near[0]}]?" if near else ""
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]{hint}")
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            near = difflib.get_close_matches(key, defaults, n=1)
            hint = f"; nearest valid key is {near[0]!r}" if near else ""
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}{hint}")
        if section is not None and key_section[key] != section:
            raise ConfigError(f"{source}:{lineno}: key {key!r} belongs in [{key_section[key]}], not [{section}]")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, defaults[key])
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), source=str(p))


def _format(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg) -> str:
    lines = []
    for sec, keys in CONFIG_SECTIONS.items():
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {_format(getattr(cfg, k))}" for k in keys)
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def _atomic_write(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    _atomic_write(path, text.encode())


def write_snapshot(state, path):
    g = state.grid
    c = np.ascontiguousarray(state.profile.coeffs, dtype="<c16")
    header = _HEADER.pack(MAGIC, VERSION, g.n_points, float(g.domain_length), float(state.t))
    _atomic_write(path, header + c.view("<f8").tobytes())


def read_snapshot(path, *, symmetry_tol: float = 1e-9):
    from .evolution import SimConfig, SimState

    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header: {len(data)} of {_HEADER.size} bytes at offset {len(data)}")
    magic, version, n, L, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: version {version} is not supported (expected {VERSION})")
    need = _HEADER.size + 16 * n
    if len(data) < need:
        raise SnapshotError(f"{path}: truncated at byte offset {len(data)}; expected {need} bytes for N={n}")
    if len(data) > need:
        raise SnapshotError(f"{path}: {len(data) - need} trailing bytes after offset {need}")
    c = np.frombuffer(data, dtype="<f8", count=2 * n, offset=_HEADER.size).view("<c16").astype(complex)
    try:
        grid = FourierGrid(int(n), float(L))
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from None
    prof = SpectralField(grid, c)
    defect = prof.symmetry_defect()
    if defect > symmetry_tol:
        raise SnapshotError(f"{path}: conjugate symmetry violated by {defect:.3g} (> {symmetry_tol:g})")
    return SimState(float(t), prof, SimConfig(n_points=int(n), domain_length=float(L)), 0)


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    started: float
    finished: Optional[float] = None
    files: List[str] = field(default_factory=list)
    abort_reason: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    def write(self, path):
        atomic_write_text(path, self.to_json() + "\n")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


class NumericalAbort(RuntimeError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _emit_csv(header: Sequence[str], rows, out: Optional[str]) -> Optional[str]:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return _emit(buf.getvalue(), out)


def _emit(text: str, out: Optional[str]) -> Optional[str]:
    if out in (None, "-"):
        sys.stdout.write(text)
        return None
    atomic_write_text(out, text)
    return out


def _floats(text: str) -> List[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _cmd_coeffs(args) -> int:
    from .symbols import coeff_c, coeff_d

    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    rows = [(n, ell, coeff_c(n), coeff_d(n, ell)) for n in range(1, args.n + 1) for ell in range(1, 2 * n + 2)]
    _emit_csv(["n", "ell", "c_n", "d_n_ell"], rows, args.out)
    return 0


def _cmd_symbol_check(args) -> int:
    from .symbols import SymbolQuery, t_symbol_closed, t_symbol_quadrature

    rng = np.random.default_rng(args.seed)
    rows, failed = [], 0
    for trial in range(args.trials):
        mag = rng.uniform(args.low, args.high, 2 * args.n + 1)
        etas = mag * rng.choice([-1.0, 1.0], mag.size)
        q = SymbolQuery(args.n, tuple(etas), args.tol)
        a = t_symbol_closed(q)
        b = t_symbol_quadrature(q)
        rel = abs(a - b) / abs(a) if a else abs(b)
        ok = rel <= 10 * args.tol
        failed += not ok
        rows.append((trial, args.n, " ".join(repr(float(e)) for e in etas), a, b, rel, "PASS" if ok else "FAIL"))
    _emit_csv(["trial", "n", "etas", "closed", "quadrature", "rel_err", "status"], rows, args.out)
    return 2 if failed else 0


def _cmd_oracle_check(args) -> int:
    from .nonlinearity import NonlinearityConfig, full_nonlinearity, zeta_integral_oracle
    from .spectral_core import RealField

    g = FourierGrid(args.n_points, args.length)
    j = g.n_points // 2 + args.offset
    cfg = NonlinearityConfig(n_max=args.n_max, oracle_cutoff=args.cutoff)
    rows, prev = [], None
    for a in _floats(args.amplitudes):
        phi = RealField.from_function(g, lambda x: a * np.exp(-((x / args.width) ** 2)))
        gap = abs(zeta_integral_oracle(phi, j, cfg) - full_nonlinearity(phi, cfg).values[j])
        rows.append((a, gap, prev / gap if prev else float("nan")))
        prev = gap
    _emit_csv(["amplitude", "gap", "previous_over_gap"], rows, args.out)
    return 0


def _cmd_decay_study(args) -> int:
    from .dispersion import decay_fit
    from .evolution import linear_propagate
    from .spectral_core import RealField, forward_transform, inverse_transform

    g = FourierGrid(args.n_points, args.length)
    phi = RealField.from_function(g, lambda x: np.exp(-((x / args.width) ** 2)) * np.cos(args.carrier * x))
    f = forward_transform(phi)
    ts = np.linspace(args.t0, args.t1, args.samples)
    linf = [float(np.max(np.abs(inverse_transform(linear_propagate(f, t)).values))) for t in ts]
    expo = decay_fit(list(zip(ts, linf)), (args.t0, args.t1))
    _emit_csv(["t", "linf", "fitted_exponent"], [(t, v, expo) for t, v in zip(ts, linf)], args.out)
    return 0


def _cmd_energy_report(args) -> int:
    from .evolution import profile_to_solution
    from .paraproduct import build_blog_symbol, operator_norm, weighted_energy, weyl_matrix
    from .spectral_core import inverse_transform, sobolev_norm

    st = read_snapshot(args.snapshot)
    phi_hat = profile_to_solution(st)
    phi = inverse_transform(phi_hat)
    op = weyl_matrix(build_blog_symbol(phi, args.n_max))
    nrm = operator_norm(op)
    energies = [weighted_energy(phi, j, check=False, matrix=op) for j in range(args.s + 1)]
    report = {
        "t": st.t,
        "s": args.s,
        "hs_norms": {str(j): sobolev_norm(phi_hat, j) for j in range(args.s + 1)},
        "energies": {str(j): e for j, e in enumerate(energies)},
        "energy_total": sum(energies),
        "tblog_norm": nrm,
        "energy_defined": nrm < 2.0,
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if nrm < 2.0 else 2


def _cmd_resonance_map(args) -> int:
    from .dispersion import membership, phase_phi, resonance_sets

    sets = resonance_sets(args.xi, args.t)
    e = np.linspace(-args.span, args.span, args.points)
    rows = []
    for e1 in e:
        for e2 in e:
            rows.append((e1, e2, phase_phi(args.xi, e1, e2), membership(sets, e1, e2) or ""))
    _emit_csv(["eta1", "eta2", "phi", "set"], rows, args.out)
    return 0


def _run_with_outputs(cfg, outdir: Path, callback=None):
    from .evolution import run

    manifest = RunManifest(dataclasses.asdict(cfg), config_hash(cfg), time.time())
    res = run(cfg, snapshot_dir=str(outdir / "snapshots"), callback=callback)
    names = [f.name for f in dataclasses.fields(res.records[0])]
    diag = outdir / "diagnostics.csv"
    _emit_csv(names, [[getattr(r, n) for n in names] for r in res.records], str(diag))
    manifest.files = [str(diag)] + res.snapshots
    manifest.abort_reason = res.abort_reason
    manifest.finished = time.time()
    return res, manifest


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    out = Path(args.out)
    res, manifest = _run_with_outputs(cfg, out)
    mpath = out / "manifest.json"
    manifest.files.append(str(mpath))
    manifest.write(mpath)
    if res.aborted:
        print(f"aborted: {res.abort_reason} (last good t={res.last_good_time:g})", file=sys.stderr)
        return 2
    return 0


def _cmd_scatter_phase(args) -> int:
    from .dispersion import corrected_profile, new_scattering_phase, scattering_phase_update
    from .evolution import profile_to_solution

    cfg = parse_config(args.config)
    g = cfg.grid
    mode = args.mode
    if not 0 < mode < g.n_points // 2:
        raise ConfigError(f"--mode must lie in 1..{g.n_points // 2 - 1}")
    acc = [new_scattering_phase(g, [mode])]
    rows = []

    def track(st):
        ph = profile_to_solution(st)
        acc[0] = scattering_phase_update(acc[0], ph, st.t)
        v = corrected_profile(ph, acc[0])
        rows.append((st.t, g.wavenumber(mode), float(np.angle(st.profile.coeffs[mode])), float(np.angle(v.coeffs[mode]))))

    from .evolution import initial_state

    track(initial_state(cfg))
    res, manifest = _run_with_outputs(cfg, Path(args.out), callback=track)
    _emit_csv(["t", "xi", "arg_h", "arg_v"], rows, str(Path(args.out) / "scatter_phase.csv"))
    manifest.files.append(str(Path(args.out) / "scatter_phase.csv"))
    manifest.write(Path(args.out) / "manifest.json")
    return 2 if res.aborted else 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sqgfront", description="Spectral solver and diagnostics for the SQG front equation.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", help="run the solver from a config file")
    s.add_argument("--config", required=True, help="key=value config file")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("decay-study", help="L-infinity decay of a linearly evolved packet (CSV)")
    s.add_argument("--n-points", type=int, default=2**14)
    s.add_argument("--length", type=float, default=4000.0)
    s.add_argument("--carrier", type=float, default=1.0)
    s.add_argument("--width", type=float, default=5.0)
    s.add_argument("--t0", type=float, default=20.0)
    s.add_argument("--t1", type=float, default=200.0)
    s.add_argument("--samples", type=int, default=37)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_decay_study)

    s = sub.add_parser("symbol-check", help="closed form vs quadrature for T_n (CSV)")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--low", type=float, default=0.3)
    s.add_argument("--high", type=float, default=3.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_symbol_check)

    s = sub.add_parser("coeffs", help="table of c_n and d_{n,l} (CSV)")
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_coeffs)

    s = sub.add_parser("oracle-check", help="z-integral oracle vs truncated series across amplitudes (CSV)")
    s.add_argument("--amplitudes", default="0.02,0.01,0.005")
    s.add_argument("--n-max", type=int, default=2)
    s.add_argument("--n-points", type=int, default=256)
    s.add_argument("--length", type=float, default=40.0)
    s.add_argument("--width", type=float, default=1.5)
    s.add_argument("--offset", type=int, default=6, help="evaluation node relative to the centre")
    s.add_argument("--cutoff", type=float, default=1e3)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_oracle_check)

    s = sub.add_parser("energy-report", help="norms and weighted energies of a snapshot (JSON)")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--s", type=int, default=2)
    s.add_argument("--n-max", type=int, default=1)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_energy_report)

    s = sub.add_parser("resonance-map", help="Phi on an (eta1, eta2) grid with set labels (CSV)")
    s.add_argument("--xi", type=float, default=1.0)
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--span", type=float, default=2.0)
    s.add_argument("--points", type=int, default=81)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_resonance_map)

    s = sub.add_parser("scatter-phase", help="track arg h and arg v at one mode during a run (CSV)")
    s.add_argument("--config", required=True)
    s.add_argument("--mode", type=int, required=True, help="tracked mode index k > 0")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=_cmd_scatter_phase)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    from .nonlinearity import OracleError
    from .paraproduct import ConvergenceError
    from .symbols import QuadratureError

    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (QuadratureError, OracleError, ConvergenceError, NumericalAbort, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, SnapshotError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
