"""
Base class for the pwcycles command tools
"""
import logging
import os
from abc import ABC, abstractmethod
from datetime import datetime
from typing import Any, Dict, Optional

import jsonschema
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

from core.properties_configurator import PropertiesConfigurator
from core.report_writer import ReportWriter
from core.run_config import DEFAULT_OUT_DIR
from pwcycles.tolerances import Tolerances

METRICS_REGISTRY = CollectorRegistry()

COMMAND_RUNS = Counter(
    'pwcycles_command_runs_total', 'Command executions by outcome',
    ['command', 'status'], registry=METRICS_REGISTRY,
)
COMMAND_SECONDS = Histogram(
    'pwcycles_command_seconds', 'Command wall-clock time',
    ['command'], registry=METRICS_REGISTRY,
    buckets=(0.1, 0.5, 1.0, 5.0, 30.0, 120.0, 600.0, float('inf')),
)


def write_metrics(path: str):
    """Dump the command metrics in the Prometheus text format"""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    write_to_textfile(path, METRICS_REGISTRY)


class BaseCommandTool(ABC):
    """
    Abstract base class for all command tools

    A tool is declared in config/tools/<name>.json; its inputSchema is checked
    with jsonschema before execute() runs. execute() returns a dict with at
    least 'passed', 'summary' and 'files'.
    """

    def __init__(self, config: Optional[Dict] = None):
        self.config = config or {}
        self.logger = logging.getLogger(self.__class__.__name__)
        self._name = self.config.get('name', self.__class__.__name__)
        self._description = self.config.get('description', '')
        self._version = self.config.get('version', '1.0.0')
        self._enabled = self.config.get('enabled', True)
        self._input_schema = self.config.get('inputSchema', {})
        self._metadata = self.config.get('metadata', {})
        self._execution_count = 0
        self._last_execution = None
        self._total_execution_time = 0.0

    @property
    def name(self) -> str:
        return self._name

    @property
    def description(self) -> str:
        return self._description

    @property
    def version(self) -> str:
        return self._version

    @property
    def enabled(self) -> bool:
        return self._enabled

    @property
    def metadata(self) -> Dict:
        return self._metadata

    @property
    def input_schema(self) -> Dict:
        if not self._input_schema:
            return self.get_input_schema()
        return self._input_schema

    @abstractmethod
    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """
        Run the command

        Args:
            arguments: Validated command arguments

        Returns:
            Result dictionary with 'passed', 'summary' and 'files'
        """

    @abstractmethod
    def get_input_schema(self) -> Dict:
        """Fallback JSON schema when the config file carries none"""

    def validate_arguments(self, arguments: Dict[str, Any]) -> bool:
        """
        Validate arguments against the input schema

        Raises:
            jsonschema.ValidationError: on the first violation
        """
        jsonschema.validate(instance=arguments, schema=self.input_schema)
        return True

    def execute_with_tracking(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """Validate, execute, and record counters and timings"""
        if not self.enabled:
            raise ValueError(f"Command is disabled: {self.name}")

        self.validate_arguments(arguments)

        start_time = datetime.now()
        status = 'error'
        try:
            with COMMAND_SECONDS.labels(command=self.name).time():
                result = self.execute(arguments)
            status = 'passed' if result.get('passed') else 'failed'
            execution_time = (datetime.now() - start_time).total_seconds()

            self._execution_count += 1
            self._last_execution = datetime.now()
            self._total_execution_time += execution_time

            self.logger.info(f"Command executed: {self.name} ({execution_time:.2f}s, {status})")
            return result
        finally:
            COMMAND_RUNS.labels(command=self.name, status=status).inc()

    def get_metrics(self) -> Dict:
        avg_execution_time = (
            self._total_execution_time / self._execution_count
            if self._execution_count > 0 else 0
        )
        return {
            "name": self.name,
            "version": self.version,
            "enabled": self.enabled,
            "execution_count": self._execution_count,
            "last_execution": self._last_execution.isoformat() + "Z" if self._last_execution else None,
            "total_execution_time": self._total_execution_time,
            "average_execution_time": avg_execution_time,
        }

    def to_listing(self) -> Dict:
        return {
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema,
        }

    # helpers shared by the command implementations

    def tolerances(self, arguments: Dict[str, Any]) -> Tolerances:
        return Tolerances.from_properties(PropertiesConfigurator(), arguments.get('tolerances'))

    def writer(self, arguments: Dict[str, Any]) -> ReportWriter:
        return ReportWriter(arguments.get('out') or DEFAULT_OUT_DIR)

    def jobs(self, arguments: Dict[str, Any]) -> int:
        return max(1, int(arguments.get('jobs') or os.cpu_count() or 1))

    def result(self, passed: bool, summary: Dict, writer: ReportWriter) -> Dict[str, Any]:
        return {"passed": bool(passed), "summary": summary, "files": list(writer.written)}


def common_properties() -> Dict:
    """Schema properties every command accepts"""
    return {
        "out": {"type": "string", "description": "Output directory"},
        "jobs": {"type": "integer", "minimum": 1, "description": "Worker threads"},
        "coefficients": {"type": "string", "description": "Coefficient-table JSON file"},
        "tolerances": {
            "type": "object",
            "description": "Tolerance overrides by flag suffix",
            "additionalProperties": {"type": "number"},
        },
    }


def level_properties(max_level: int = 4) -> Dict:
    """Schema properties of commands that work on a level of the family"""
    return {
        "k": {"type": "integer", "minimum": 0, "maximum": max_level, "description": "Level"},
        "epsilon": {"type": "number", "minimum": 0, "description": "Base perturbation size"},
        "epsilon_vector": {"type": "array", "items": {"type": "number"},
                           "description": "Per-level perturbation sizes eps_1..eps_k"},
        "deep_level": {"type": "boolean", "description": "Allow levels above the default cap"},
    }
