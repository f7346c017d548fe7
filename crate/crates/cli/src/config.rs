use std::path::Path;
use std::str::FromStr;

use toml::{Table, Value};

use crate::grid::Grid;
use crate::CliError;

/// Values from a flat TOML file, keyed by flag name (`sigma-max` and
/// `sigma_max` are the same key).
///
/// Each accessor consumes its key and returns the command-line value when
/// one was given, else the file value. [`finish`](Self::finish) rejects keys
/// that no accessor asked for.
#[derive(Debug, Default)]
pub struct ConfigLayer {
    table: Table,
}

impl ConfigLayer {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        let mut table = Table::new();
        for (k, v) in raw {
            if v.is_table() {
                return Err(format!("key {k:?}: nested tables are not supported, use flat keys"));
            }
            table.insert(k.replace('_', "-"), v);
        }
        Ok(Self { table })
    }

    pub fn finish(&self) -> Result<(), CliError> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(_) => {
                let keys: Vec<&str> = self.table.keys().map(String::as_str).collect();
                Err(CliError::Usage(format!("unknown config keys for this command: {}", keys.join(", "))))
            }
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    pub fn f64(&mut self, key: &str, cli: Option<f64>) -> Result<Option<f64>, CliError> {
        let file = match self.take(key) {
            None => None,
            Some(Value::Float(x)) => Some(x),
            Some(Value::Integer(n)) => Some(n as f64),
            Some(v) => return Err(type_error(key, "a number", &v)),
        };
        Ok(cli.or(file))
    }

    pub fn u64(&mut self, key: &str, cli: Option<u64>) -> Result<Option<u64>, CliError> {
        let file = match self.take(key) {
            None => None,
            Some(Value::Integer(n)) if n >= 0 => Some(n as u64),
            Some(v) => return Err(type_error(key, "a nonnegative integer", &v)),
        };
        Ok(cli.or(file))
    }

    pub fn usize(&mut self, key: &str, cli: Option<usize>) -> Result<Option<usize>, CliError> {
        let file = self.u64(key, None)?;
        Ok(cli.or(file.map(|n| n as usize)))
    }

    pub fn bool(&mut self, key: &str, cli: bool) -> Result<bool, CliError> {
        match self.take(key) {
            None => Ok(cli),
            Some(Value::Boolean(b)) => Ok(cli || b),
            Some(v) => Err(type_error(key, "true or false", &v)),
        }
    }

    pub fn string(&mut self, key: &str, cli: Option<String>) -> Result<Option<String>, CliError> {
        let file = match self.take(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(v) => return Err(type_error(key, "a string", &v)),
        };
        Ok(cli.or(file))
    }

    /// Accepts a grid string (`"log:1:100:3"`), an array of numbers, or a
    /// single number.
    pub fn grid(&mut self, key: &str, cli: Option<Grid>) -> Result<Option<Grid>, CliError> {
        let file = match self.take(key) {
            None => None,
            Some(Value::String(s)) => Some(Grid::from_str(&s).map_err(|e| CliError::Usage(format!("config key {key}: {e}")))?),
            Some(Value::Float(x)) => Some(Grid(vec![x])),
            Some(Value::Integer(n)) => Some(Grid(vec![n as f64])),
            Some(Value::Array(items)) => Some(Grid(
                items
                    .iter()
                    .map(|v| match v {
                        Value::Float(x) => Ok(*x),
                        Value::Integer(n) => Ok(*n as f64),
                        other => Err(type_error(key, "an array of numbers", other)),
                    })
                    .collect::<Result<_, _>>()?,
            )),
            Some(v) => return Err(type_error(key, "a grid string or an array of numbers", &v)),
        };
        Ok(cli.or(file))
    }
}

fn type_error(key: &str, expected: &str, got: &Value) -> CliError {
    CliError::Usage(format!("config key {key}: expected {expected}, got {}", got.type_str()))
}
