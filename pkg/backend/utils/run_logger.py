"""
Check logging for theorem-backed assertions
Keeps a ledger of check outcomes and logs start/end events to stderr
"""
import logging
import sys
from collections import Counter
from typing import Any, List, Optional

from backend.config import settings
from backend.errors import TheoremCheckFailed
from backend.state import CheckRecord

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for an entry point (logs go to stderr)"""
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper(), logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


class CheckLogger:
    """
    Ledger of theorem-backed checks.

    Passing checks are only counted; failures are kept in full so a report
    can list them. ensure() raises TheoremCheckFailed on failure.
    """

    def __init__(self, enabled: Optional[bool] = None):
        self.enabled = settings.log_checks if enabled is None else enabled
        self.passed = Counter()
        self.failures: List[CheckRecord] = []

    def on_check_start(self, name: str, **context: Any) -> None:
        if self.enabled:
            logger.debug("check %s started %s", name, context or "")

    def record(self, name: str, passed: bool, detail: str = "") -> CheckRecord:
        """Record one outcome without raising"""
        check = CheckRecord(name=name, passed=bool(passed), detail=detail)
        if check.passed:
            self.passed[name] += 1
            if self.enabled:
                logger.debug("check %s passed %s", name, detail)
        else:
            self.failures.append(check)
            logger.error("check %s FAILED: %s", name, detail)
        return check

    def ensure(self, name: str, passed: bool, detail: str = "") -> CheckRecord:
        """Record and raise TheoremCheckFailed when the check failed"""
        check = self.record(name, passed, detail)
        if not check.passed:
            raise TheoremCheckFailed(name, detail)
        return check

    def summary(self) -> str:
        total = sum(self.passed.values())
        return f"{total} checks passed, {len(self.failures)} failed"

    def reset(self) -> None:
        self.passed.clear()
        self.failures.clear()


# Singleton instance
check_logger = CheckLogger()
