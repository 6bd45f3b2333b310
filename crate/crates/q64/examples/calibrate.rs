//! Run the two acceptance campaigns (5 random seeds, 4 cyclic seeds) into
//! the shared scratch directory that the acceptance test resumes from, and
//! print the resulting ledgers and reports.

use q64::campaign::{report, run_campaign, CampaignManifest, CampaignMode};
use q64::isotropic::PairType;
use std::path::PathBuf;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_secs()
        .init();
    let base = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/tmp/acceptance");

    let random = CampaignManifest::new(CampaignMode::Random, [PairType::I; 8], 1, 5);
    let rows = run_campaign(&random, &base.join("random")).unwrap();
    for row in &rows {
        println!("{}", serde_json::to_string(&row).unwrap());
    }
    println!("{}", report(&base.join("random")).unwrap());

    let cyclic = CampaignManifest::new(CampaignMode::Cyclic, [PairType::I; 8], 1, 4);
    let rows = run_campaign(&cyclic, &base.join("cyclic")).unwrap();
    for row in &rows {
        println!("{}", serde_json::to_string(&row).unwrap());
    }
    println!("{}", report(&base.join("cyclic")).unwrap());
}
