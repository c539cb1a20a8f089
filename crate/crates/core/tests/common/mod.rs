#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tempfile::TempDir;
use textsql_kit::corpus::{
    database_path, load_examples, load_schemas, open_database, Database, DbSchema, Example,
};
use textsql_kit::evaluator::Hardness;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
}

/// Fixture schemas and examples plus SQLite databases built from the
/// `sql/*.sql` scripts into a temporary root.
pub struct Fixture {
    pub root: TempDir,
    pub schemas: BTreeMap<String, DbSchema>,
    pub examples: Vec<Example>,
}

impl Fixture {
    pub fn build() -> Self {
        let root = tempfile::tempdir().expect("tempdir");
        let schemas = load_schemas(Self::tables_path()).expect("fixture tables.json");
        let examples = load_examples(Self::examples_path(), &schemas).expect("fixture dev.json");
        for db_id in schemas.keys() {
            let script =
                std::fs::read_to_string(fixture_dir().join("sql").join(format!("{db_id}.sql")))
                    .expect("fixture sql script");
            let path = database_path(root.path(), db_id);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            let conn = rusqlite::Connection::open(&path).expect("create fixture db");
            conn.execute_batch(&script).expect("load fixture db");
        }
        Fixture {
            root,
            schemas,
            examples,
        }
    }

    pub fn tables_path() -> PathBuf {
        fixture_dir().join("tables.json")
    }

    pub fn examples_path() -> PathBuf {
        fixture_dir().join("dev.json")
    }

    pub fn db_root(&self) -> &Path {
        self.root.path()
    }

    pub fn schema(&self, db_id: &str) -> &DbSchema {
        &self.schemas[db_id]
    }

    pub fn open(&self, db_id: &str) -> Database {
        open_database(self.schema(db_id), self.db_root()).expect("open fixture db")
    }

    /// One handle per database, keyed by db_id.
    pub fn open_all(&self) -> BTreeMap<String, Database> {
        self.schemas
            .keys()
            .map(|id| (id.clone(), self.open(id)))
            .collect()
    }
}

/// Frozen hardness trace: (level, comp1, comp2, others) per example.
pub fn hardness_golden() -> Vec<(Hardness, usize, usize, usize)> {
    let text = std::fs::read_to_string(fixture_dir().join("hardness_golden.tsv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split('\t').collect();
            assert_eq!(
                f[0].parse::<usize>().unwrap(),
                i,
                "golden records out of order"
            );
            let level = Hardness::ALL
                .into_iter()
                .find(|h| h.label() == f[1])
                .unwrap_or_else(|| panic!("unknown level {}", f[1]));
            (
                level,
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
                f[4].parse().unwrap(),
            )
        })
        .collect()
}
