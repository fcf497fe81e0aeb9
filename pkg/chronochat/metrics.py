from typing import Any, Dict, Mapping
import logging
import threading

from prometheus_client import Counter, Gauge

logger = logging.getLogger(__name__)


class ChronochatMetrics:
    """
    ChronochatMetrics exposes chat-room and language-model activity to Prometheus.

    Metric structure (names and labels) is fixed at first use and every
    series lives in the default registry, so the class is meant to be used
    through the CHRONOCHAT_METRICS singleton.

    Example exported metric:
      chronochat_sessions_ended_total{gap_bucket='weeks'} 3.0
    """
    INTERNAL_COUNTERS: Dict[str, Any] = {
        'chronochat_rooms_created': {
            'metric_help': 'Chat rooms created',
            'base_labels': []
        },
        'chronochat_utterances_posted': {
            'metric_help': 'Utterances accepted by chat rooms',
            'base_labels': []
        },
        'chronochat_sessions_ended': {
            'metric_help': 'Sessions ended, by sampled gap bucket',
            'base_labels': ['gap_bucket']
        },
        'chronochat_llm_calls': {
            'metric_help': 'Chat-completion calls by backend mode and outcome',
            'base_labels': ['mode', 'outcome']
        },
    }
    INTERNAL_GAUGES: Dict[str, Any] = {
        'chronochat_rooms': {
            'metric_help': 'Chat rooms currently known to the service, by phase',
            'base_labels': ['phase']
        },
    }

    _gauges: Dict[str, Gauge]
    _counters: Dict[str, Counter]

    def __init__(self):
        self._gauges = {}
        self._counters = {}
        self._lock = threading.Lock()
        self._initialised = False

    def _add_gauge(self, name: str, help: str, labels: list):
        if name not in self._gauges:
            self._gauges[name] = Gauge(name, help, labels)

    def _add_counter(self, name: str, help: str, labels: list):
        if name not in self._counters:
            self._counters[name] = Counter(name, help, labels)

    def init_metrics(self) -> None:
        """
        Register every metric once; later calls are no-ops.
        """
        with self._lock:
            if self._initialised:
                return
            for mkey, mvalue in self.INTERNAL_COUNTERS.items():
                self._add_counter(mkey, mvalue.get('metric_help'), mvalue.get('base_labels'))
            for mkey, mvalue in self.INTERNAL_GAUGES.items():
                self._add_gauge(mkey, mvalue.get('metric_help'), mvalue.get('base_labels'))
            self._initialised = True

    def _counter(self, name: str) -> Counter:
        self.init_metrics()
        return self._counters[name]

    def inc_rooms_created(self) -> None:
        self._counter('chronochat_rooms_created').inc()

    def inc_utterances(self) -> None:
        self._counter('chronochat_utterances_posted').inc()

    def inc_sessions_ended(self, gap_bucket: str) -> None:
        self._counter('chronochat_sessions_ended').labels(gap_bucket=gap_bucket).inc()

    def inc_llm_calls(self, mode: str, outcome: str) -> None:
        self._counter('chronochat_llm_calls').labels(mode=mode, outcome=outcome).inc()

    def set_rooms_by_phase(self, counts: Mapping[str, int]) -> None:
        self.init_metrics()
        gauge = self._gauges['chronochat_rooms']
        for phase, value in counts.items():
            gauge.labels(phase=phase).set(value)


CHRONOCHAT_METRICS = ChronochatMetrics()
"""Process-wide metrics instance"""
