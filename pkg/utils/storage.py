import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from config import CLI_CONFIG

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Convert numpy values and non-finite floats into plain JSON data."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {'re': to_jsonable(value.real), 'im': to_jsonable(value.imag)}
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return value


class ArtifactStorage:
    """
    Writes run artifacts (JSON, CSV, gnuplot scripts, manifest) into one directory.

    Output is deterministic: JSON keys are sorted and nothing time-dependent
    is recorded.
    """

    def __init__(self, out_dir: Optional[str] = None):
        """
        Initialize artifact storage.

        Args:
            out_dir: Output directory, created if missing
        """
        self.out_dir = Path(out_dir or CLI_CONFIG['out_dir'])
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[str] = []

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _record(self, name: str) -> None:
        if name not in self.artifacts:
            self.artifacts.append(name)

    def write_json(self, name: str, data: Any) -> Path:
        """Save data as sorted, indented JSON."""
        target = self.path(name)
        with open(target, 'w', encoding='utf-8') as f:
            json.dump(to_jsonable(data), f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write('\n')
        self._record(name)
        logger.info(f"Saved {target}")
        return target

    def write_csv(self, name: str, columns: Mapping[str, Sequence[float]]) -> Path:
        """Save equal-length columns; the first column is usually t."""
        headers = list(columns)
        lengths = {len(columns[h]) for h in headers}
        if len(lengths) > 1:
            raise ValueError(f"CSV columns have different lengths: {sorted(lengths)}")
        fmt = CLI_CONFIG['float_format']
        target = self.path(name)
        with open(target, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(headers)
            for row in zip(*(columns[h] for h in headers)):
                writer.writerow([fmt % float(v) for v in row])
        self._record(name)
        logger.info(f"Saved {target}")
        return target

    def write_gnuplot(self, csv_name: str, headers: Sequence[str], log_y: bool = False) -> Path:
        """Plot script that draws every column of csv_name against the first."""
        stem = Path(csv_name).stem
        lines = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set xlabel '{headers[0]}'",
        ]
        if log_y:
            lines.append("set logscale y")
        lines.append("set terminal pngcairo size 900,600")
        lines.append(f"set output '{stem}.png'")
        plots = [f"'{csv_name}' using 1:{i + 1} with lines" for i in range(1, len(headers))]
        lines.append("plot " + ", \\\n     ".join(plots))
        name = f"{stem}.gp"
        target = self.path(name)
        target.write_text("\n".join(lines) + "\n", encoding='utf-8')
        self._record(name)
        return target

    def write_manifest(self, config: Dict[str, Any], outcome: Dict[str, Any]) -> Path:
        """manifest.json: resolved config, outcome and the artifact list."""
        return self.write_json('manifest.json', {
            'config': config,
            'outcome': outcome,
            'artifacts': sorted(a for a in self.artifacts if a != 'manifest.json'),
        })

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def load_json(self, name: str) -> Optional[Dict[str, Any]]:
        target = self.path(name)
        if not target.exists():
            logger.info(f"No artifact found at {target}")
            return None
        with open(target, 'r', encoding='utf-8') as f:
            return json.load(f)
