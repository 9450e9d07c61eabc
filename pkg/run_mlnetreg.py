#!/usr/bin/env python3
"""Command line entry point for the multilayer network regression toolkit."""

from __future__ import annotations

from mlnetreg.cli import main

if __name__ == "__main__":  # pragma: no cover - CLI entry point
    raise SystemExit(main())
