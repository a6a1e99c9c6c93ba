use std::fs;

use anyhow::{Context, Result};

use synergy_core::fixtures::{self, fixture_selfcheck, FixtureError};

use crate::args::{FixturesAction, FixturesArgs};
use crate::output::{csv_string, emit, num, Failure};

pub fn run(args: FixturesArgs) -> Result<()> {
    match args.action {
        FixturesAction::List => {
            let mut body = String::new();
            for name in fixtures::workload_names() {
                body += &format!("workload {name}\n");
            }
            for name in fixtures::device_set_names() {
                body += &format!("devices {name}\n");
            }
            for m in fixtures::all_models()? {
                body += &format!("model {}\n", m.name.to_ascii_lowercase());
            }
            emit(None, "fixtures", &body)
        }
        FixturesAction::Check => match fixture_selfcheck() {
            Ok(checks) => {
                let rows: Vec<Vec<String>> = checks
                    .iter()
                    .map(|c| {
                        vec![
                            c.name.clone(),
                            c.layers.to_string(),
                            c.size_bytes.to_string(),
                            format!("{:.1}", c.avg_out_bytes),
                            num(c.avg_out_deviation),
                        ]
                    })
                    .collect();
                let body = csv_string(
                    &[
                        "model",
                        "layers",
                        "size_bytes",
                        "avg_out_bytes",
                        "avg_out_deviation",
                    ],
                    &rows,
                )?;
                emit(None, "fixtures", &body)
            }
            Err(FixtureError::FixtureDrift(list)) => Err(Failure::with_code(2, list.join("\n"))),
            Err(e) => Err(e.into()),
        },
        FixturesAction::Export { dir } => {
            fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let names = ["models".to_string()]
                .into_iter()
                .chain(fixtures::device_set_names().map(|n| format!("devices-{n}")))
                .chain(fixtures::workload_names().map(str::to_string));
            for name in names {
                let text = fixtures::raw(&name).expect("listed fixture exists");
                let path = dir.join(format!("{name}.json"));
                fs::write(&path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(())
        }
    }
}
