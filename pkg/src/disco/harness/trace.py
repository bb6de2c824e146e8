"""CSV trace output for solver runs."""

from __future__ import annotations

TRACE_HEADER = "outer_iter,grad_norm,inner_iters_cum,rounds_cum,bytes_cum,wall_ms"

__all__ = ["TRACE_HEADER", "write_trace_csv"]


def write_trace_csv(path, records):
    """One row per outer iteration; floats use repr so non-timing columns are
    byte-reproducible across identical runs."""
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for rec in records:
            fh.write(
                f"{rec.outer_iter},{rec.grad_norm!r},{rec.inner_iters_cum},"
                f"{rec.rounds_cum},{rec.bytes_cum},{rec.wall_ms!r}\n"
            )
