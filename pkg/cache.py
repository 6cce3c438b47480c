"""SQLite cache for emitted CLI reports."""
import json
import sqlite3
from typing import Sequence

DB_PATH = "reports_cache.db"


def _key(argv: Sequence[str]) -> str:
    return json.dumps(list(argv), separators=(",", ":"))


def init_db():
    """Initialize the database and create tables if they don't exist."""
    conn = sqlite3.connect(DB_PATH)
    conn.execute("""
        CREATE TABLE IF NOT EXISTS reports (
            argv TEXT PRIMARY KEY,
            output TEXT NOT NULL,
            cached_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
        )
    """)
    conn.commit()
    conn.close()


def get_cached_report(argv: Sequence[str]) -> str | None:
    """
    Retrieve the cached output of a command line.

    Args:
        argv: The command line, without the program name.

    Returns:
        The emitted report text if cached, or None if not cached.
    """
    conn = sqlite3.connect(DB_PATH)
    cursor = conn.execute("SELECT output FROM reports WHERE argv = ?", (_key(argv),))
    row = cursor.fetchone()
    conn.close()
    return row[0] if row else None


def cache_report(argv: Sequence[str], output: str):
    """
    Store the emitted report of a successful run, replacing any earlier entry.

    Args:
        argv: The command line, without the program name.
        output: The report text written to standard output.
    """
    conn = sqlite3.connect(DB_PATH)
    conn.execute(
        "INSERT OR REPLACE INTO reports (argv, output) VALUES (?, ?)",
        (_key(argv), output),
    )
    conn.commit()
    conn.close()


def clear_cache():
    """Delete all cached data."""
    conn = sqlite3.connect(DB_PATH)
    conn.execute("DELETE FROM reports")
    conn.commit()
    conn.close()
