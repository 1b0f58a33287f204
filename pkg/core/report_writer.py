"""
Report emission: JSON for machine-readable reports, CSV for tables and polylines
"""
import csv
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def _to_plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class ReportWriter:
    """
    Writes into one output directory; every file written is remembered so the
    command result can list it.
    """

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: List[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_json(self, name: str, data: Dict) -> str:
        """Sorted keys and fixed indentation so repeated runs give identical bytes"""
        target = self.path(name)
        with open(target, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, sort_keys=True, default=_to_plain)
            f.write('\n')
        self._remember(target)
        return target

    def write_csv(self, name: str, rows: Iterable[Dict], columns: Sequence[str]) -> str:
        target = self.path(name)
        with open(target, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction='ignore')
            writer.writeheader()
            for row in rows:
                writer.writerow({key: _to_plain(v) if isinstance(v, np.generic) else v
                                 for key, v in row.items()})
        self._remember(target)
        return target

    def _remember(self, target: str):
        self.written.append(target)
        logger.info(f"wrote {target}")
