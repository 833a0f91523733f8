# services/report_writer.py
"""
Deterministic artifacts: JSON with sorted keys, CSV growth tables and a
Markdown certificate table. Nothing time-dependent is written.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Tuple, Union

from config import Config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ReportWriter:
    def __init__(self, output_dir: PathLike = None):
        self.output_dir = Path(output_dir or Config.OUTPUT_DIR)

    def _target(self, name: PathLike) -> Path:
        path = Path(name)
        if not path.is_absolute():
            path = self.output_dir / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def envelope(pipeline: str, config_echo: Dict[str, Any], result: Dict[str, Any]) -> Dict[str, Any]:
        """Every artifact carries the tool version and the configuration that produced it"""
        return {'tool': 'quasimorphism-lab', 'version': Config.VERSION, 'pipeline': pipeline,
                'config': config_echo, 'result': result}

    def write_json(self, name: PathLike, document: Dict[str, Any]) -> Path:
        path = self._target(name)
        text = json.dumps(document, sort_keys=True, indent=2, ensure_ascii=True, default=str)
        with open(path, 'w', encoding='ascii', newline='\n') as handle:
            handle.write(text + "\n")
        logger.info(f"Wrote {path}")
        return path

    def export_growth_csv(self, name: PathLike, rows: Iterable[Tuple[int, int]]) -> Path:
        """Header n,h_value; one row per power in increasing n"""
        path = self._target(name)
        with open(path, 'w', encoding='ascii', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['n', 'h_value'])
            for n, value in sorted(rows):
                writer.writerow([n, value])
        logger.info(f"Wrote {path}")
        return path

    def write_certificate_markdown(self, name: PathLike, certificate: Dict[str, Any]) -> Path:
        path = self._target(name)
        lines = [
            "# Independence certificate",
            "",
            f"accepted: {'yes' if certificate['accepted'] else 'no'}  ",
            f"W = {certificate['W']}, n_max = {certificate['n_max']}, "
            f"oracle checked: {'yes' if certificate['oracle_checked'] else 'no'}",
            "",
            "| i | member length | h_i(f_i^n), n = 1.. | slope | max h_i on earlier members | defect |",
            "|---|---|---|---|---|---|",
        ]
        off_diagonal: Dict[int, int] = {}
        for cell in certificate['off_diagonal']:
            off_diagonal[cell['i']] = max(off_diagonal.get(cell['i'], 0), cell['max_abs'])
        defects = {entry['i']: entry['defect'] for entry in certificate['defects']}
        for row in certificate['growth']:
            i = row['i']
            values = " ".join(str(cell['h_value']) for cell in row['rows'])
            earlier = off_diagonal.get(i, "-") if i > 1 else "-"
            lines.append(f"| {i} | {row['w_length']} | {values} | {row['slope']} | {earlier} | {defects.get(i, '-')} |")
        if certificate['failures']:
            lines += ["", "## Failures", ""] + [f"- {failure}" for failure in certificate['failures']]
        if not certificate['abelianization_trivial']:
            lines += ["", "Note: some members have nonzero exponent sums."]
        with open(path, 'w', encoding='ascii', newline='\n') as handle:
            handle.write("\n".join(lines) + "\n")
        logger.info(f"Wrote {path}")
        return path
