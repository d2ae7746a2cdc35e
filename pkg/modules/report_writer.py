"""
Module 6: Report Writer

Run reports for the command-line surface:
- JSON reports (sorted keys, exact integers, complex numbers as [re, im])
- Sweep CSV files through pandas
- Human-readable text tables

Author: Wronski Count
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence
import sys
import os

import numpy as np
import pandas as pd

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import format_duration_ms
from modules.combinatorics import ProblemSpec

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['spec', 'd', 'm', 'regime', 'formula', 'schubert', 'sing', 'rep',
                 'agree', 'orbits', 'max_residual']


@dataclass
class RunReport:
    """
    Outcome of one command: counts per route and, when solving, the orbits
    with their reconstructed classes and verification figures.
    """
    command: str
    spec: Optional[ProblemSpec] = None
    regime: Optional[str] = None
    z_used: Optional[List[complex]] = None
    counts: Dict[str, int] = field(default_factory=dict)
    orbits: List[dict] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    config: Optional[dict] = None
    seed: Optional[int] = None
    notes: List[str] = field(default_factory=list)
    spot_check: Optional[dict] = None
    exit_code: int = 0

    @property
    def agreement(self) -> bool:
        """True iff every computed route returned the same count."""
        return len(set(self.counts.values())) <= 1


def _jsonable(value):
    """Convert report values to plain JSON types."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, ProblemSpec):
        return {'d': value.d, 'm': list(value.m), 'n': value.n, 'M': value.M,
                'k': value.k, 'm_inf': value.m_inf}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_jsonable(float(value.real)), _jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    return value


class ReportWriter:
    """
    Serializes run reports and sweep tables.
    """

    def __init__(self, config: dict, include_timings: bool = True):
        """
        Initialize the report writer.

        Args:
            config: Configuration dictionary
            include_timings: False drops timings so that reports are reproducible
        """
        self.config = config
        self.include_timings = include_timings
        self.indent = config.get('output', {}).get('json_indent', 2)
        logger.debug("ReportWriter initialized")

    def to_dict(self, report: RunReport) -> dict:
        data = {
            'command': report.command,
            'spec': report.spec,
            'regime': report.regime,
            'z_used': report.z_used,
            'counts': report.counts,
            'agreement': report.agreement,
            'orbits': report.orbits,
            'config': report.config,
            'seed': report.seed,
            'notes': report.notes,
            'exit_code': report.exit_code,
        }
        if report.spot_check is not None:
            data['spot_check'] = report.spot_check
        if self.include_timings:
            data['timings'] = report.timings
        return _jsonable(data)

    def dumps(self, report: RunReport) -> str:
        return json.dumps(self.to_dict(report), sort_keys=True, indent=self.indent)

    def write_json(self, report: RunReport, path: str) -> None:
        """
        Write the JSON report; '-' writes to standard output.

        Args:
            report: Run report
            path: Output file path or '-'
        """
        text = self.dumps(report)
        if path == '-':
            print(text)
            return
        output_path = Path(path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
        logger.info(f"JSON report saved: {output_path}")

    def write_sweep_csv(self, rows: Sequence[dict], path: str) -> pd.DataFrame:
        """
        Save sweep rows as CSV (header only when there are no rows).

        Args:
            rows: Row dictionaries keyed by SWEEP_COLUMNS
            path: Output CSV path

        Returns:
            The written DataFrame
        """
        frame = sweep_frame(rows)
        output_path = Path(path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output_path, index=False)
        logger.info(f"Sweep CSV saved: {output_path} ({len(frame)} rows)")
        return frame

    def format_count_table(self, report: RunReport) -> str:
        lines = [
            "=" * 60,
            f"Class count for {report.spec.label()}  [{report.regime}]",
            "=" * 60,
        ]
        for route, value in report.counts.items():
            timing = report.timings.get(route)
            suffix = f"  ({format_duration_ms(timing)})" if self.include_timings and timing is not None else ""
            lines.append(f"{route:12} {value:>10}{suffix}")
        lines.append("-" * 60)
        lines.append(f"agreement: {'yes' if report.agreement else 'NO'}")
        lines.extend(report.notes)
        lines.append("=" * 60)
        return "\n".join(lines)

    def format_solve_table(self, report: RunReport) -> str:
        lines = [
            "=" * 60,
            f"Critical orbits for {report.spec.label()}  (seed {report.seed})",
            "=" * 60,
        ]
        for index, orbit in enumerate(report.orbits, 1):
            points = ", ".join(f"{complex(*p):.6g}" for p in orbit.get('points', []))
            verification = orbit.get('verification') or {}
            status = "pass" if verification.get('passed') else "FAIL"
            residual = (orbit.get('reconstruction') or {}).get('wronskian_residual')
            residual_text = f"{residual:.2e}" if residual is not None else "n/a"
            lines.append(f"#{index:<3} [{points}]  W-residual {residual_text}  {status}")
        lines.append("-" * 60)
        lines.append("  ".join(f"{route}: {value}" for route, value in report.counts.items()))
        if report.spot_check is not None:
            check = report.spot_check
            lines.append(f"spot check: {check['original']} -> {check['perturbed']} orbits "
                         f"({'stable' if check['stable'] else 'UNSTABLE'})")
        lines.extend(report.notes)
        lines.append("=" * 60)
        return "\n".join(lines)

    @staticmethod
    def format_series_table(title: str, rows: Sequence[Sequence]) -> str:
        """Table of (index, value, oracle...) rows with a MISMATCH marker."""
        lines = ["=" * 60, title, "=" * 60]
        for row in rows:
            index, value, *oracles = row
            marker = "" if all(o == value for o in oracles) else "  MISMATCH"
            lines.append(f"{index:>4}  {value:>40}" + "".join(f"  {o}" for o in oracles) + marker)
        lines.append("=" * 60)
        return "\n".join(lines)

    @staticmethod
    def format_sweep_summary(frame: pd.DataFrame, offending: Sequence[str]) -> str:
        lines = ["=" * 60, "Route-identity sweep", "=" * 60,
                 f"admissible specs checked: {len(frame)}"]
        if len(frame):
            lines.append(f"largest count:            {int(frame['formula'].max())}")
            solved = frame['orbits'].notna().sum()
            if solved:
                lines.append(f"instances solved:         {solved}")
        if offending:
            lines.append(f"offending rows:           {len(offending)}")
            lines.extend(f"  {row}" for row in offending)
        else:
            lines.append("all routes agree")
        lines.append("=" * 60)
        return "\n".join(lines)


def sweep_frame(rows: Sequence[dict]) -> pd.DataFrame:
    """DataFrame with the sweep columns in fixed order."""
    return pd.DataFrame(list(rows), columns=SWEEP_COLUMNS)


def main():
    """
    Demonstrate report serialization.
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    report = RunReport(
        command='count',
        spec=ProblemSpec(3, (1, 1, 1, 1)),
        regime='GENERIC',
        counts={'formula': 2, 'schubert': 2, 'rep': 2},
        timings={'formula': 0.1, 'schubert': 0.4, 'rep': 0.2}
    )
    writer = ReportWriter({}, include_timings=False)
    print(writer.format_count_table(report))
    print(writer.dumps(report))


if __name__ == "__main__":
    main()
