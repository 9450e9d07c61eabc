from __future__ import annotations

import json
import os
import tempfile
import unittest
from datetime import date, timedelta
from pathlib import Path
from unittest import mock

from mlnetreg import monitoring


class StructuredLoggingTests(unittest.TestCase):
    def setUp(self) -> None:
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

        patcher = mock.patch.dict(
            os.environ,
            {"MLNETREG_RUN_LOG_DIR": self.tmpdir.name, "MLNETREG_LOG_RETENTION_DAYS": "2"},
        )
        patcher.start()
        self.addCleanup(patcher.stop)

        monitoring.setup_logging("WARNING")
        monitoring._LAST_CLEANUP = None

    def tearDown(self) -> None:
        # Ensure the module-level cleanup flag resets between tests
        monitoring._LAST_CLEANUP = None

    def _entries(self) -> list:
        log_path = Path(self.tmpdir.name) / f"{date.today().isoformat()}.jsonl"
        self.assertTrue(log_path.exists())
        return [json.loads(line) for line in log_path.read_text(encoding="utf-8").splitlines()]

    def test_run_log_emits_structured_entry(self) -> None:
        monitoring.log_run(
            "simulate",
            duration_ms=12.3456,
            exit_status=0,
            metadata={"argv": ["simulate", "--reps", "5"]},
        )

        entries = self._entries()
        self.assertEqual(len(entries), 1)
        entry = entries[0]
        self.assertEqual(entry["category"], "run")
        self.assertEqual(entry["command"], "simulate")
        self.assertEqual(entry["exit_status"], 0)
        self.assertEqual(entry["duration_ms"], 12.346)
        self.assertEqual(entry["metadata"], {"argv": ["simulate", "--reps", "5"]})
        self.assertIn("timestamp", entry)

    def test_cleanup_removes_expired_files(self) -> None:
        old_date = date.today() - timedelta(days=5)
        old_path = Path(self.tmpdir.name) / f"{old_date.isoformat()}.jsonl"
        old_path.write_text("{\n}", encoding="utf-8")
        stray = Path(self.tmpdir.name) / "notes.jsonl"
        stray.write_text("", encoding="utf-8")

        monitoring.log_system_info("hello", metadata={"seed": 1})

        self.assertFalse(old_path.exists())
        self.assertTrue(stray.exists())
        entries = self._entries()
        self.assertEqual(entries[-1]["category"], "system")
        self.assertEqual(entries[-1]["metadata"], {"seed": 1})

    def test_system_error_logs_exception_details(self) -> None:
        monitoring.log_system_error("failed", exc=ValueError("boom"))

        entry = self._entries()[-1]
        self.assertEqual(entry["category"], "system")
        self.assertEqual(entry["level"], "ERROR")
        self.assertEqual(entry["message"], "failed")
        self.assertEqual(entry["exception"], {"type": "ValueError", "message": "boom"})

    def test_no_directory_means_no_file(self) -> None:
        with mock.patch.dict(os.environ, {"MLNETREG_RUN_LOG_DIR": ""}):
            monitoring.log_run("vif", duration_ms=1.0, exit_status=0)
        self.assertEqual(list(Path(self.tmpdir.name).iterdir()), [])


if __name__ == "__main__":
    unittest.main()
