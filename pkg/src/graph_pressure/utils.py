from __future__ import annotations
import math
import os
import shutil
import sys
import time
from typing import Dict, List, Optional, TextIO, Tuple


def fmt_num(value: Optional[float]) -> str:
    """15 significant digits; ``NA`` for missing or non-finite values."""
    if value is None or not math.isfinite(value):
        return "NA"
    return f"{value:.15g}"


def parse_float(text: str, what: str = "value") -> float:
    try:
        val = float(text)
    except ValueError:
        raise ValueError(f"{what}: not a number: {text!r}") from None
    if not math.isfinite(val):
        raise ValueError(f"{what}: must be finite, got {text!r}")
    return val


def parse_assignments(text: str) -> Dict[str, float]:
    """``e1=0.5,e2=1`` → ``{"e1": 0.5, "e2": 1.0}`` (order kept)."""
    out: Dict[str, float] = {}
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"expected id=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if not key:
            raise ValueError(f"missing edge id in {item!r}")
        if key in out:
            raise ValueError(f"edge {key!r} given twice")
        out[key] = parse_float(val, key)
    if not out:
        raise ValueError("no id=value assignments given")
    return out


def parse_range(text: str) -> Tuple[float, float]:
    """``lo:hi`` with ``lo < hi``."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"expected lo:hi, got {text!r}")
    lo, hi = (parse_float(p, "range bound") for p in parts)
    if not lo < hi:
        raise ValueError(f"empty range {text!r}")
    return lo, hi


def split_axes(text: str) -> List[str]:
    axes = [s.strip() for s in text.split(",") if s.strip()]
    if len(axes) != 2:
        raise ValueError(f"expected two axes min:max:count,min:max:count, got {text!r}")
    return axes


# ---------------------------------------------------
# terminal progress (stderr; stdout carries results)

def _supports_color(stream: TextIO) -> bool:
    if os.environ.get("NO_COLOR"):
        return False
    try:
        return stream.isatty()
    except Exception:
        return False


def _fmt_time(seconds: float) -> str:
    if seconds <= 0:
        return "0s"
    m, s = divmod(int(seconds), 60)
    h, m = divmod(m, 60)
    if h:
        return f"{h}h {m}m {s}s"
    if m:
        return f"{m}m {s}s"
    return f"{s}s"


def progress(label: str, done: int, total: int, start_ts: float,
             stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stderr
    width = shutil.get_terminal_size(fallback=(80, 20)).columns
    barw = max(10, min(40, width - 50))
    pct = int(100 * done / max(1, total))
    fill = int(barw * done / max(1, total))
    filled = "█" * fill
    unfilled = "░" * (barw - fill)

    color = _supports_color(stream)
    if color:
        bar = f"\x1b[36m{filled}\x1b[0m{unfilled}"
    else:
        bar = filled + unfilled

    elapsed = time.time() - start_ts
    rate = (done / elapsed) if elapsed > 0 else 0
    eta = ((total - done) / rate) if rate > 0 and total > 0 else 0
    msg = f"{label} [{bar}] {done}/{total} ({pct}%) | elapsed {_fmt_time(elapsed)} | eta {_fmt_time(eta)}"

    # slicing would cut escape sequences
    out = "\r" + (msg if color else msg[: width - 1])
    if done >= total:
        out += "\n"
    stream.write(out)
    stream.flush()
