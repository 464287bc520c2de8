//! Writes a plain RBM and a transfer target model to JSON, reads them back and checks
//! that saving again reproduces the files byte for byte.
//!
//! `cargo run --example save_load`

use rbm_transfer::persist::{self, ModelFile};
use rbm_transfer::ranking::score_features;
use rbm_transfer::transfer::{build_transfer_spec, init_target};
use rbm_transfer::{Rbm, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let source = Rbm::init(6, 4, VisibleType::Binary, 1)?;
    let spec = build_transfer_spec(&source, &score_features(&source), 2, 0.5)?;
    let target = init_target(spec, 6, 3, VisibleType::Binary, 2)?;

    let plain_json = persist::rbm_to_json(&source)?;
    let target_json = persist::target_to_json(&target)?;
    println!("{plain_json}");

    let again = match persist::model_from_json(&target_json)? {
        ModelFile::Target(t) => persist::target_to_json(&t)?,
        ModelFile::Plain(_) => unreachable!("target files carry a spec"),
    };
    let plain_again = persist::rbm_to_json(&persist::rbm_from_json(&plain_json)?)?;
    println!("plain re-save identical:  {}", plain_again == plain_json);
    println!("target re-save identical: {}", again == target_json);
    Ok(())
}
