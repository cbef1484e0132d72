"""Run configuration, schemas and per-run logs."""
