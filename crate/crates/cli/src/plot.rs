//! Generated matplotlib scripts. Plotting is optional; nothing else reads them.

use std::fmt::Write as _;

use crate::config::{Axis, Metric};

fn axis_label(axis: Axis) -> &'static str {
    match axis {
        Axis::SnrDb => "SNR (dB)",
        Axis::Lambda => "power splitting ratio lambda",
        Axis::R => "multiplexing gain r",
        Axis::D1 => "source-relay distance d1",
    }
}

fn metric_label(metric: Metric) -> &'static str {
    match metric {
        Metric::Outage => "outage probability",
        Metric::Capacity => "ergodic sum capacity (bps/Hz)",
        Metric::Diversity => "diversity gain",
    }
}

/// A script plotting every method of every `(csv, label)` pair. CSV paths are
/// relative to the script's directory.
pub fn script(title: &str, metric: Metric, axis: Axis, files: &[(String, String)]) -> String {
    let mut s = String::new();
    s.push_str("import csv\nimport os\n\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\nFILES = [\n");
    for (f, label) in files {
        let _ = writeln!(s, "    ({f:?}, {label:?}),");
    }
    s.push_str("]\n\n");
    s.push_str(
        "\
def load(path):
    curves = {}
    with open(os.path.join(HERE, path)) as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith(\"#\"))
        for row in rows:
            x, y = curves.setdefault(row[\"method\"], ([], []))
            x.append(float(row[\"axis\"]))
            y.append(float(row[\"value\"]))
    return curves


fig, ax = plt.subplots()
for path, label in FILES:
    for method, (x, y) in load(path).items():
        style = \"o\" if method == \"mc\" else \"-\"
        ax.plot(x, y, style, label=f\"{method} ({label})\")
",
    );
    if metric == Metric::Outage {
        s.push_str("ax.set_yscale(\"log\")\n");
    }
    let _ = writeln!(s, "ax.set_xlabel({:?})", axis_label(axis));
    let _ = writeln!(s, "ax.set_ylabel({:?})", metric_label(metric));
    let _ = writeln!(s, "ax.set_title({title:?})");
    s.push_str("ax.grid(True, alpha=0.3)\nax.legend(fontsize=\"small\")\n");
    s.push_str("fig.savefig(os.path.splitext(os.path.abspath(__file__))[0] + \".png\", dpi=150)\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_references_files_relatively() {
        let s = script("t", Metric::Outage, Axis::SnrDb, &[("a.csv".into(), "x".into())]);
        assert!(s.contains("(\"a.csv\", \"x\")"));
        assert!(s.contains("set_yscale"));
        assert!(!s.contains("/root"));
    }
}
