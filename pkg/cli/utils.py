import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from agtd import __version__
from agtd.dataflows.config import get_config, reset_config, set_config
from agtd.dataflows.utils import sha256_file, utc_now
from agtd.errors import ManifestError
from cli.models import OutputFormat, RunManifest

logger = logging.getLogger("agtd.cli")

# Operator output goes to stderr; stdout stays free for data.
console = Console(stderr=True)


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=verbose, rich_tracebacks=verbose)],
        force=True,
    )


def load_config_file(path: Optional[Path]) -> Dict[str, Any]:
    """Read a TOML ``key = value`` file; unknown keys are a usage error."""
    if path is None:
        return {}
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise typer.BadParameter(f"{path}: {e}", param_hint="--config") from e
    return data


def resolve_config(config_path: Optional[Path], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """DEFAULT_CONFIG, then the --config file, then explicit flags (None means unset)."""
    reset_config()
    try:
        set_config(load_config_file(config_path))
        set_config({k: v for k, v in overrides.items() if v is not None})
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="--config") from e
    return get_config()


def resolve_format(out: Path, fmt: Optional[OutputFormat], default: str = OutputFormat.JSON.value) -> str:
    """Explicit --format wins, then the --out suffix, then ``default``."""
    if fmt is not None:
        return fmt.value
    suffix = out.suffix.lstrip(".").lower()
    return suffix if suffix in {f.value for f in OutputFormat} else default


def parse_float_list(raw: Optional[str], option: str) -> Optional[List[float]]:
    if raw is None:
        return None
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"expected comma-separated numbers, got '{raw}'", param_hint=option) from e


def manifest_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}.manifest.json")


def start_manifest(
    command: str,
    config: Mapping[str, Any],
    seed: int,
    inputs: Iterable[Optional[Union[str, Path]]],
    config_path: Optional[Path] = None,
) -> RunManifest:
    """Hash every file the run reads, the --config file included."""
    input_hashes: Dict[str, str] = {}
    for p in [*inputs, config_path]:
        if p is None or str(p) in input_hashes:
            continue
        if not Path(p).is_file():
            logger.warning("Input %s is not a file; not recorded in the manifest", p)
            continue
        input_hashes[str(p)] = sha256_file(p)
    return RunManifest(
        command=command,
        config=dict(config),
        input_hashes=input_hashes,
        seed=seed,
        tool_version=__version__,
        started=utc_now(),
    )


def write_manifest(manifest: RunManifest, out: Path, outputs: Sequence[Path] = ()) -> Path:
    finished = manifest.model_copy(
        update={
            "finished": utc_now(),
            "outputs": {str(p): sha256_file(p) for p in outputs if Path(p).exists()},
        }
    )
    path = manifest_path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(finished.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def verify_manifest(path: Union[str, Path]) -> RunManifest:
    """Re-hash every recorded input; raise ManifestError on any mismatch."""
    try:
        manifest = RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValueError as e:
        raise ManifestError(f"{path}: unreadable manifest ({e})") from e
    for file, expected in manifest.input_hashes.items():
        if not Path(file).exists():
            raise ManifestError(f"input '{file}' recorded in {path} no longer exists")
        actual = sha256_file(file)
        if actual != expected:
            raise ManifestError(f"input '{file}' changed since the run ({actual[:12]} != {expected[:12]})")
    return manifest


def summary_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for col in columns:
        table.add_column(col)
    for row in rows:
        table.add_row(*[f"{v:.4f}" if isinstance(v, float) else str(v) for v in row])
    return table
