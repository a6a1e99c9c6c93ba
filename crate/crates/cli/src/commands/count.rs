use anyhow::Result;
use serde_json::{json, Value};

use synergy_core::enumerate::{count_execution_plans, reduction_factor};
use synergy_core::BigUint;

use crate::args::CountArgs;
use crate::output::{csv_string, emit, pretty, Format};

/// Exact integers stay numbers while they fit in u64, strings beyond.
fn big_json(v: &impl ToString) -> Value {
    let s = v.to_string();
    s.parse::<u64>()
        .map(Value::from)
        .unwrap_or(Value::String(s))
}

pub fn run(args: CountArgs) -> Result<()> {
    let d = args.devices;
    let Some(layers) = args.pipelines else {
        let l = args.layers.expect("clap requires layers or pipelines");
        let n = count_execution_plans(l, d);
        let body = match args.format {
            None => format!("{n}\n"),
            Some(Format::Json) => {
                pretty(&json!({"layers": l, "devices": d, "count": big_json(&n)}))
            }
            Some(Format::Csv) => csv_string(
                &["layers", "devices", "count"],
                &[vec![l.to_string(), d.to_string(), n.to_string()]],
            )?,
        };
        return emit(None, "count", &body);
    };
    let counts: Vec<_> = layers
        .iter()
        .map(|&l| count_execution_plans(l, d))
        .collect();
    let product: BigUint = counts.iter().product();
    let sum: BigUint = counts.iter().sum();
    let ratio = reduction_factor(&product, &sum);
    let body = match args.format {
        None => {
            let mut s = String::new();
            for (l, n) in layers.iter().zip(&counts) {
                s += &format!("{l} {n}\n");
            }
            s += &format!("product {product}\nsum {sum}\nratio {ratio:.3}\n");
            s
        }
        Some(Format::Json) => pretty(&json!({
            "devices": d,
            "pipelines": layers.iter().zip(&counts).map(|(l, n)| json!({"layers": l, "count": big_json(n)})).collect::<Vec<_>>(),
            "product": big_json(&product),
            "sum": big_json(&sum),
            "ratio": format!("{ratio:.3}"),
        })),
        Some(Format::Csv) => {
            let mut rows: Vec<Vec<String>> = layers
                .iter()
                .zip(&counts)
                .map(|(l, n)| vec![l.to_string(), n.to_string()])
                .collect();
            rows.push(vec!["product".into(), product.to_string()]);
            rows.push(vec!["sum".into(), sum.to_string()]);
            rows.push(vec!["ratio".into(), format!("{ratio:.3}")]);
            csv_string(&["layers", "count"], &rows)?
        }
    };
    emit(None, "count", &body)
}
