//! Regenerate the scene files under `assets/`.
//!
//! Run from the repository root:
//!
//! ```text
//! cargo run -p despeckle-cli --example gen_assets
//! ```
//!
//! Produces the clean quadrants phantom and its single-look speckled version
//! used by the example benchmark config. The speckle seed is fixed, so the
//! outputs are reproducible for a given toolkit build.

use despeckle::raster::{write_image, RasterFormat};
use despeckle::synth::{
    apply_multiplicative, generate_speckle_field, make_phantom, PhantomKind, SpeckleParams,
};

fn main() {
    let size = 256;
    let clean = make_phantom(
        size,
        size,
        PhantomKind::Quadrants {
            levels: [60.0, 110.0, 160.0, 210.0],
        },
    )
    .expect("valid phantom");
    let field = generate_speckle_field(size, size, SpeckleParams::new(1.0, 42))
        .expect("valid speckle params");
    let noisy = apply_multiplicative(&clean, &field).expect("matching dimensions");

    std::fs::create_dir_all("assets").expect("create assets dir");
    write_image(&clean, "assets/scene_clean.sgrid".as_ref(), RasterFormat::Sgrid)
        .expect("write clean scene");
    write_image(&noisy, "assets/scene_noisy.sgrid".as_ref(), RasterFormat::Sgrid)
        .expect("write noisy scene");
    println!("wrote assets/scene_clean.sgrid and assets/scene_noisy.sgrid ({size}x{size})");
}
