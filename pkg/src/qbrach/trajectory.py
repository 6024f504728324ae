"""Time-stamped trajectory samples and their CSV / JSON serialization."""

import io
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ValidationError

CSV_HEADER = ("t,r_x,r_y,r_z,s_x,s_y,s_z,h_x,h_y,h_z,purity,"
              "conserved_x,conserved_y,conserved_z,fidelity")


def format_number(x) -> str:
    """Shortest round-trip decimal for a float; empty string for a missing value."""
    if x is None:
        return ""
    return repr(float(x))


@dataclass
class TrajectoryRecord:
    """Samples of a one-qubit run.

    ``t`` has shape (n,); ``r``, ``s``, ``h`` and ``conserved`` shape (n, 3);
    ``lindblad`` shape (n, 3, m) complex with one Lindblad vector per column;
    ``fidelity`` shape (n,). Anything not produced by a run is ``None``.
    """

    t: np.ndarray
    r: np.ndarray
    spacing: float
    s: np.ndarray | None = None
    h: np.ndarray | None = None
    lindblad: np.ndarray | None = None
    conserved: np.ndarray | None = None
    fidelity: np.ndarray | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def purity(self) -> np.ndarray:
        """``Tr rho^2 = (1 + |r|^2)/2``."""
        return 0.5 * (1.0 + np.sum(self.r**2, axis=1))

    @property
    def final_r(self) -> np.ndarray:
        return self.r[-1]

    def conservation_drift(self) -> np.ndarray:
        if self.conserved is None:
            raise ValidationError("record carries no conserved vector")
        return np.linalg.norm(self.conserved - self.conserved[0], axis=1)

    def validate(self, norm_tol: float = 1e-9, spacing_tol: float = 1e-12,
                 conservation_tol: float | None = None) -> None:
        """Self-consistency check run before any file is reported as written."""
        t = np.asarray(self.t)
        if t.ndim != 1 or len(t) == 0:
            raise ValidationError("empty trajectory")
        if len(t) > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                raise ValidationError("sample times are not strictly increasing")
            if np.max(np.abs(dt - self.spacing)) > spacing_tol * max(1.0, t[-1]):
                raise ValidationError("sample spacing is not uniform")
        for name in ("r", "s", "h", "conserved", "fidelity", "lindblad"):
            arr = getattr(self, name)
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValidationError(f"non-finite values in column {name}")
        if np.max(np.linalg.norm(self.r, axis=1)) > 1.0 + norm_tol:
            raise ValidationError("Bloch vector left the unit ball")
        if conservation_tol is not None and self.conserved is not None:
            if np.max(self.conservation_drift()) > conservation_tol:
                raise ValidationError("conserved vector drifted beyond tolerance")

    # -- serialization -----------------------------------------------------

    def _rows(self):
        n = len(self.t)
        pur = self.purity
        for k in range(n):
            row = [self.t[k], *self.r[k]]
            row += list(self.s[k]) if self.s is not None else [None] * 3
            row += list(self.h[k]) if self.h is not None else [None] * 3
            row.append(pur[k])
            row += list(self.conserved[k]) if self.conserved is not None else [None] * 3
            row.append(self.fidelity[k] if self.fidelity is not None else None)
            yield row

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        buf.write(CSV_HEADER + "\n")
        for row in self._rows():
            buf.write(",".join(format_number(x) for x in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        names = CSV_HEADER.split(",")
        samples = []
        for k, row in enumerate(self._rows()):
            item = {n: (None if v is None else float(v)) for n, v in zip(names, row)}
            if self.lindblad is not None:
                # interleaved (re, im) per component, one list per vector
                item["lindblad"] = [
                    [float(x) for z in self.lindblad[k][:, a] for x in (z.real, z.imag)]
                    for a in range(self.lindblad.shape[2])
                ]
            samples.append(item)
        payload = {"diagnostics": _jsonable(self.diagnostics), "samples": samples}
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"

    def write(self, path, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def read_csv(path) -> dict[str, np.ndarray]:
    """Load a trajectory CSV into column arrays (missing fields become NaN)."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [[float(x) if x else np.nan for x in line.rstrip("\n").split(",")] for line in fh]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}
