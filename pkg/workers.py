from __future__ import annotations
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

from config import CONFIG
from models import SweepRow

try:
    from PyQt6.QtCore import QRunnable, QThreadPool
    HAVE_QT = True
except ImportError:  # headless installs without Qt
    QRunnable = object  # type: ignore[misc,assignment]
    QThreadPool = None  # type: ignore[misc,assignment]
    HAVE_QT = False

logger = logging.getLogger("AdiabaticFrames.Worker")

RowTask = Callable[[int, float], SweepRow]


class SweepWorker(QRunnable):
    """Runs one sweep row and hands the result to `sink`."""

    def __init__(self, index: int, value: float, task: RowTask, sink: Callable[[SweepRow], None]):
        super().__init__()
        self.index = index
        self.value = value
        self.task = task
        self.sink = sink

    def run(self):
        try:
            row = self.task(self.index, self.value)
        except Exception as e:
            # A crashing row must not stall the sweep: record it in-row.
            logger.exception("Worker crashed for sweep value %s: %s", self.value, e)
            row = SweepRow.failed(self.index, self.value, f"Worker exception: {e}")
        self.sink(row)


class BatchSweeper:
    """
    Executes sweep rows concurrently and returns them in sweep order.

    Rows share no mutable state; results land in an index-keyed slot table.
    Every value yields exactly one row.
    """

    def __init__(self, workers: int = CONFIG.DEFAULT_WORKERS, use_qt: Optional[bool] = None):
        self.workers = max(CONFIG.MIN_WORKERS, min(CONFIG.MAX_WORKERS, int(workers)))
        self.use_qt = HAVE_QT if use_qt is None else (use_qt and HAVE_QT)
        self._slots: Dict[int, SweepRow] = {}
        self._lock = threading.Lock()

    def _store(self, row: SweepRow) -> None:
        with self._lock:
            self._slots[row.index] = row
            done = len(self._slots)
        logger.debug("Sweep row %d (value %.6g) finished; %d done", row.index, row.value, done)

    def run(self, values: Sequence[float], task: RowTask) -> List[SweepRow]:
        self._slots = {}
        jobs = [SweepWorker(i, float(v), task, self._store) for i, v in enumerate(values)]
        if not jobs:
            return []

        if self.workers == 1 or len(jobs) == 1:
            for job in jobs:
                job.run()
        elif self.use_qt:
            pool = QThreadPool()
            pool.setMaxThreadCount(self.workers)
            for job in jobs:
                job.setAutoDelete(False)
                pool.start(job)
            logger.info("Enqueued %d sweep row(s); pool max=%d", len(jobs), pool.maxThreadCount())
            pool.waitForDone()
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                logger.info("Enqueued %d sweep row(s) on %d thread(s)", len(jobs), self.workers)
                list(pool.map(lambda job: job.run(), jobs))

        with self._lock:
            return [self._slots[i] for i in range(len(jobs))]
