/// Store schema. Documented table by table in `docs/schema.md`.
pub const SCHEMA_SQL: &str = r#"
CREATE TABLE IF NOT EXISTS users (
    user_id     TEXT PRIMARY KEY NOT NULL
);

CREATE TABLE IF NOT EXISTS query_records (
    record_id   TEXT PRIMARY KEY NOT NULL,
    user_id     TEXT NOT NULL REFERENCES users (user_id),
    query_text  TEXT NOT NULL,
    objective   TEXT NOT NULL CHECK (objective IN ('text', 'image', 'video')),
    provider    TEXT NOT NULL,
    ts_ms       INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS query_records_user_ts ON query_records (user_id, ts_ms);

CREATE TABLE IF NOT EXISTS snippets (
    snippet_id  TEXT PRIMARY KEY NOT NULL,
    record_id   TEXT NOT NULL REFERENCES query_records (record_id),
    rank        INTEGER NOT NULL CHECK (rank BETWEEN 1 AND 10),
    title       TEXT NOT NULL,
    body        TEXT NOT NULL,
    url         TEXT NOT NULL,
    interaction TEXT NOT NULL CHECK (interaction IN ('clicked', 'saved', 'none')),
    UNIQUE (record_id, rank)
);

CREATE TABLE IF NOT EXISTS sessions (
    session_id  TEXT PRIMARY KEY NOT NULL,
    user_id     TEXT NOT NULL REFERENCES users (user_id),
    start_ms    INTEGER NOT NULL,
    end_ms      INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS sessions_user_end ON sessions (user_id, end_ms);

CREATE TABLE IF NOT EXISTS session_records (
    session_id  TEXT NOT NULL REFERENCES sessions (session_id) ON DELETE CASCADE,
    position    INTEGER NOT NULL,
    record_id   TEXT NOT NULL UNIQUE REFERENCES query_records (record_id),
    PRIMARY KEY (session_id, position)
);

CREATE TABLE IF NOT EXISTS graphs (
    session_id  TEXT PRIMARY KEY NOT NULL REFERENCES sessions (session_id) ON DELETE CASCADE,
    document    TEXT NOT NULL
);

CREATE TABLE IF NOT EXISTS entities (
    session_id  TEXT NOT NULL REFERENCES graphs (session_id) ON DELETE CASCADE,
    entity_id   TEXT NOT NULL,
    label       TEXT NOT NULL,
    q_score     REAL NOT NULL,
    freq        INTEGER NOT NULL,
    n           INTEGER NOT NULL,
    avg_fel     REAL NOT NULL,
    PRIMARY KEY (session_id, entity_id)
);

CREATE TABLE IF NOT EXISTS entity_snippets (
    session_id  TEXT NOT NULL,
    entity_id   TEXT NOT NULL,
    snippet_id  TEXT NOT NULL REFERENCES snippets (snippet_id),
    PRIMARY KEY (session_id, entity_id, snippet_id),
    FOREIGN KEY (session_id, entity_id) REFERENCES entities (session_id, entity_id) ON DELETE CASCADE
);

CREATE TABLE IF NOT EXISTS edges (
    session_id  TEXT NOT NULL,
    entity_a    TEXT NOT NULL,
    entity_b    TEXT NOT NULL,
    raw_count   INTEGER NOT NULL,
    score       REAL NOT NULL CHECK (score > 0 AND score <= 1),
    PRIMARY KEY (session_id, entity_a, entity_b),
    CHECK (entity_a < entity_b),
    FOREIGN KEY (session_id, entity_a) REFERENCES entities (session_id, entity_id) ON DELETE CASCADE,
    FOREIGN KEY (session_id, entity_b) REFERENCES entities (session_id, entity_id) ON DELETE CASCADE
);

CREATE TABLE IF NOT EXISTS groups (
    group_id    TEXT PRIMARY KEY NOT NULL,
    name        TEXT NOT NULL CHECK (length(trim(name)) > 0)
);

CREATE TABLE IF NOT EXISTS group_members (
    group_id    TEXT NOT NULL REFERENCES groups (group_id) ON DELETE CASCADE,
    user_id     TEXT NOT NULL REFERENCES users (user_id),
    PRIMARY KEY (group_id, user_id)
);

CREATE TABLE IF NOT EXISTS result_tags (
    snippet_id  TEXT NOT NULL REFERENCES snippets (snippet_id),
    group_id    TEXT NOT NULL REFERENCES groups (group_id) ON DELETE CASCADE,
    tagged_by   TEXT NOT NULL REFERENCES users (user_id),
    ts_ms       INTEGER NOT NULL,
    PRIMARY KEY (snippet_id, group_id)
);
"#;
