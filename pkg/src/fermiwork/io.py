"""Text formats: covariance-matrix files and flat sweep configs."""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .exceptions import ParseError
from .modes import ModeSystem

PathLike = Union[str, Path]


def fmt(x: float) -> str:
    """Twelve significant digits, no negative zero."""
    x = float(x) + 0.0
    if x == 0:
        return "0"
    return format(x, ".12g")


def _content_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _floats(fields, number) -> List[float]:
    try:
        return [float(f) for f in fields]
    except ValueError as exc:
        raise ParseError(f"not a number ({exc})", number) from None


def parse_cm_text(text: str) -> Tuple[np.ndarray, Tuple[float, ...]]:
    """Raw matrix and frequencies from CM text; no physicality checks."""
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty file", 1)
    number, line = lines[0]
    head = line.split()
    if len(head) != 2 or head[0] != "modes":
        raise ParseError("expected 'modes <n>'", number)
    try:
        n = int(head[1])
    except ValueError:
        raise ParseError(f"mode count {head[1]!r} is not an integer", number) from None
    if n < 1:
        raise ParseError("mode count must be positive", number)
    if len(lines) < 2:
        raise ParseError("missing 'omega' line", number + 1)
    number, line = lines[1]
    fields = line.split()
    if fields[0] != "omega":
        raise ParseError("expected 'omega <w1> ... <wn>'", number)
    omegas = _floats(fields[1:], number)
    if len(omegas) != n:
        raise ParseError(f"expected {n} frequencies, got {len(omegas)}", number)
    rows = lines[2:]
    dim = 2 * n
    if len(rows) > dim:
        raise ParseError(f"unexpected content after {dim} matrix rows", rows[dim][0])
    if len(rows) < dim:
        last = rows[-1][0] if rows else lines[1][0]
        raise ParseError(f"expected {dim} matrix rows, got {len(rows)}", last + 1)
    matrix = np.empty((dim, dim))
    for i, (number, line) in enumerate(rows):
        values = _floats(line.split(), number)
        if len(values) != dim:
            raise ParseError(f"expected {dim} entries, got {len(values)}", number)
        matrix[i] = values
    if not np.all(np.isfinite(matrix)):
        raise ParseError("matrix entries must be finite", rows[0][0])
    return matrix, tuple(omegas)


def read_cm_file(path: PathLike) -> Tuple[np.ndarray, Tuple[float, ...]]:
    return parse_cm_text(Path(path).read_text(encoding="utf-8"))


def format_cm(matrix, modes, comment: Optional[str] = None) -> str:
    matrix = np.asarray(getattr(matrix, "matrix", matrix), dtype=float)
    omegas = modes.omegas if isinstance(modes, ModeSystem) else tuple(np.atleast_1d(modes))
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(f"modes {matrix.shape[0] // 2}")
    out.append("omega " + " ".join(fmt(w) for w in omegas))
    for row in matrix:
        out.append(" ".join(repr(float(v) + 0.0) for v in row))
    return "\n".join(out) + "\n"


def write_cm_file(path: PathLike, matrix, modes, comment: Optional[str] = None) -> None:
    Path(path).write_text(format_cm(matrix, modes, comment), encoding="utf-8", newline="\n")


# -- sweep configs --

SWEEP_KEYS = ("beta_a", "beta_b", "temp_a", "temp_b", "omega_a", "omega_b", "seed", "tol", "workers")
_GRID_KEYS = ("beta_a", "beta_b", "temp_a", "temp_b", "omega_a", "omega_b")


def parse_values(text: str, key: str) -> List[float]:
    """``a, b, c`` or an inclusive ``start:stop:step`` range; empty text is an empty grid."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError(f"{key}: range must be start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"{key}: range bounds must be numbers") from None
        if not step > 0:
            raise ParseError(f"{key}: step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        # integer multiples avoid accumulated drift
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"{key}: values must be numbers") from None


def parse_config_text(text: str) -> Dict[str, str]:
    entries: Dict[str, str] = {}
    for number, line in _content_lines(text):
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", number)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SWEEP_KEYS:
            raise ParseError(f"unknown key {key!r}", number)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", number)
        entries[key] = value
    return entries


@dataclass(frozen=True)
class SweepGrid:
    beta_a: Tuple[float, ...]
    beta_b: Tuple[float, ...]
    omega_a: Tuple[float, ...]
    omega_b: Tuple[float, ...]
    seed: int = 42
    tol: float = 1e-8
    workers: int = 1

    def points(self):
        """Grid points in row order: beta_a outermost, omega_b innermost."""
        for ba in self.beta_a:
            for bb in self.beta_b:
                for wa in self.omega_a:
                    for wb in self.omega_b:
                        yield ba, bb, wa, wb


def _inverse_temperatures(values: List[float], key: str) -> List[float]:
    if any(not t > 0 for t in values):
        raise ParseError(f"{key}: temperatures must be positive")
    return [1.0 / t for t in values]


def sweep_grid(entries: Dict[str, str]) -> SweepGrid:
    grids = {k: parse_values(entries[k], k) for k in _GRID_KEYS if k in entries}
    axes = {}
    for side in ("a", "b"):
        beta, temp = f"beta_{side}", f"temp_{side}"
        if beta in grids and temp in grids:
            raise ParseError(f"{beta}: give either {beta} or {temp}, not both")
        if temp in grids:
            axes[beta] = _inverse_temperatures(grids[temp], temp)
        elif beta in grids:
            if any(not b >= 0 for b in grids[beta]):
                raise ParseError(f"{beta}: inverse temperatures must be non-negative")
            axes[beta] = grids[beta]
        else:
            raise ParseError(f"{beta}: missing (or give {temp})")
        omega = f"omega_{side}"
        if omega not in grids:
            raise ParseError(f"{omega}: missing")
        if any(not w > 0 for w in grids[omega]):
            raise ParseError(f"{omega}: frequencies must be positive")
        axes[omega] = grids[omega]
    try:
        seed = int(entries.get("seed", "42"))
    except ValueError:
        raise ParseError("seed: must be an integer") from None
    try:
        tol = float(entries.get("tol", "1e-8"))
    except ValueError:
        raise ParseError("tol: must be a number") from None
    try:
        workers = int(entries.get("workers", "1"))
    except ValueError:
        raise ParseError("workers: must be an integer") from None
    if workers < 1:
        raise ParseError("workers: must be at least 1")
    return SweepGrid(
        tuple(axes["beta_a"]), tuple(axes["beta_b"]), tuple(axes["omega_a"]), tuple(axes["omega_b"]),
        seed=seed, tol=tol, workers=workers,
    )


def read_sweep_config(path: PathLike) -> SweepGrid:
    return sweep_grid(parse_config_text(Path(path).read_text(encoding="utf-8")))
