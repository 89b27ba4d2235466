"""Surgery scripts: parsing, execution, reports and shipped scripts."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .executor import Environment, ExecutionError, Report, build_environment, execute
from .parser import ParseError, PipelineScript, format_script, parse
from .report import nondiffeo_certificate, render_certificate, render_report

SCRIPTS_PACKAGE = "surgery_calc.scripts"


def scripts_dir() -> Path:
    return Path(str(resources.files(SCRIPTS_PACKAGE)))


def shipped_scripts() -> list[str]:
    return sorted(p.stem for p in scripts_dir().glob("*.surg"))


def resolve_script(ref: str) -> Path:
    """A filesystem path, or the name of a shipped script (with or without ``.surg``)."""
    p = Path(ref)
    if p.is_file():
        return p
    stem = ref[:-5] if ref.endswith(".surg") else ref
    cand = scripts_dir() / f"{stem}.surg"
    if cand.is_file():
        return cand
    raise FileNotFoundError(f"no script file or shipped script named {ref!r}")


def load_script(ref: str) -> PipelineScript:
    path = resolve_script(ref)
    return parse(path.read_text(encoding="utf-8"), base_dir=path.parent, name=path.stem)


def load_dataset(ref: str) -> Environment:
    """Lattice, classes and configurations declared by a shipped ``.lat`` file, a
    script, or a path."""
    p = Path(ref)
    if not p.is_file():
        p = scripts_dir() / ref
        if not p.is_file() and (scripts_dir() / f"{ref}.lat").is_file():
            p = scripts_dir() / f"{ref}.lat"
    if not p.is_file():
        raise FileNotFoundError(f"no dataset named {ref!r}")
    script = parse(p.read_text(encoding="utf-8"), base_dir=p.parent, name=p.stem)
    return build_environment(script)


def run_script(ref: str, n: int, track_sw: bool = True) -> Report:
    return execute(load_script(ref), n, track_sw)


__all__ = [
    "Environment", "ExecutionError", "build_environment", "load_dataset", "ParseError", "PipelineScript", "Report", "execute", "format_script",
    "load_script", "nondiffeo_certificate", "parse", "render_certificate", "render_report",
    "resolve_script", "run_script", "shipped_scripts",
]
