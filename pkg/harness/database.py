from __future__ import annotations

import logging

import aiosqlite

log = logging.getLogger("db")

ROW_FIELDS = [
    "n", "protocol", "dynamics", "trials", "p10", "p50", "p90", "censored", "rate", "ratio", "seed", "iid_p50",
    "dep_iid_ratio",
]


async def setup_db(db_path: str):
    async with aiosqlite.connect(db_path) as db:
        await db.execute(
            """CREATE TABLE IF NOT EXISTS sweep_rows (
                run_id TEXT NOT NULL,
                n INTEGER NOT NULL,
                protocol TEXT NOT NULL,
                dynamics TEXT NOT NULL,
                trials INTEGER,
                p10 REAL,
                p50 REAL,
                p90 REAL,
                censored INTEGER,
                rate REAL,
                ratio REAL,
                seed INTEGER,
                iid_p50 REAL,
                dep_iid_ratio REAL,
                PRIMARY KEY (run_id, n, protocol, dynamics)
            )"""
        )
        await db.commit()


async def save_rows(db_path: str, run_id: str, records: list[dict]):
    """Store sweep rows under run_id, replacing rows with the same key."""
    await setup_db(db_path)
    async with aiosqlite.connect(db_path) as db:
        await db.executemany(
            f"INSERT OR REPLACE INTO sweep_rows (run_id, {', '.join(ROW_FIELDS)}) "
            f"VALUES ({', '.join('?' * (len(ROW_FIELDS) + 1))})",
            [(run_id, *(record.get(name) for name in ROW_FIELDS)) for record in records],
        )
        await db.commit()
    log.info("stored %d rows as run %s", len(records), run_id)


async def get_rows(db_path: str, run_id: str) -> list[dict]:
    async with aiosqlite.connect(db_path) as db:
        db.row_factory = aiosqlite.Row
        async with db.execute(
            f"SELECT {', '.join(ROW_FIELDS)} FROM sweep_rows WHERE run_id = ? ORDER BY n, protocol, dynamics",
            (run_id,),
        ) as cursor:
            rows = await cursor.fetchall()
    return [dict(row) for row in rows]
