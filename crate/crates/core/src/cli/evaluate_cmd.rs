//! `fibra evaluate`: merge the radiomics and CNN reports into a single
//! summary document.

use super::report::{markdown_cnn, markdown_radiomics, CnnReport, RadiomicsReport};
use super::{read_json, CliError, RunConfig};
use crate::volume_io::write_file_atomic;

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let radiomics_path = cfg.out.join("radiomics_report.json");
    let cnn_path = cfg.out.join("cnn_report.json");
    let radiomics: Option<RadiomicsReport> = radiomics_path
        .exists()
        .then(|| read_json(&radiomics_path))
        .transpose()?;
    let cnn: Option<CnnReport> = cnn_path.exists().then(|| read_json(&cnn_path)).transpose()?;
    if radiomics.is_none() && cnn.is_none() {
        return Err(CliError::Data(format!(
            "no reports found under {}; run train-radiomics or train-cnn first",
            cfg.out.display()
        )));
    }

    let mut out = String::from("# Experiment summary\n\n");
    if let Some(r) = &cnn {
        out.push_str(&markdown_cnn(r));
        out.push('\n');
    }
    if let Some(r) = &radiomics {
        out.push_str(&markdown_radiomics(r));
        out.push('\n');
    }
    let path = cfg.out.join("summary.md");
    write_file_atomic(&path, out.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}
