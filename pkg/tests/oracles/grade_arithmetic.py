"""Independent grade arithmetic for the production-line goldens.

Reads the operation durations straight from the signature text and the dry
time from the program text; imports nothing from the package.
"""

from __future__ import annotations

import re
from pathlib import Path


def durations(sig_text: str) -> dict[str, int]:
    pat = re.compile(r"^operation\s+(\w+)\s*:.*!\s*(\d+)\s*$", re.M)
    return {name: int(d) for name, d in pat.findall(sig_text)}


def dry_time(program_text: str) -> int:
    return int(re.search(r"\bdelay\s+(\d+)", program_text).group(1))


def production_line(sig_path: Path, program_path: Path) -> dict[str, int]:
    d = durations(sig_path.read_text())
    paint, assemble = d["paint"], d["assemble"]
    dry = dry_time(program_path.read_text())
    return {
        "grade": paint + dry + assemble,
        "assemble_start": paint + dry,
        "unbox_time": paint + dry,
        "monitor_time": paint,  # the unsafe run unboxes as soon as paint returns
        "required": paint + dry,
        "needed": dry,
        "have": paint,
        "tau_paint": paint,
        "tau_dry": dry,
        "tau_assemble": assemble,
    }
