"""Certificates: named bound evaluations with a holds/fails verdict."""

import io
from dataclasses import dataclass, field


@dataclass
class Certificate:
    """Result of one convergence bound.

    For norm and spectral bounds ``holds`` is exactly ``value < 1``; for
    feasibility bounds ``value`` is the residual infeasibility (zero when
    the certificate holds).  ``detail`` carries per-edge or per-variable
    diagnostics and the contraction-rate estimate where one exists.
    """

    bound_name: str
    value: float
    holds: bool
    m: int | None = None
    detail: dict = field(default_factory=dict)


CSV_HEADER = "bound_name,value,holds,m"


def certificates_to_csv(certs):
    """Render certificates as CSV text with the shared schema."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for c in certs:
        m_cell = "" if c.m is None else str(c.m)
        buf.write(f"{c.bound_name},{format(c.value, '.17g')},"
                  f"{str(c.holds).lower()},{m_cell}\n")
    return buf.getvalue()
