//! Generates the four kinds of patch layout and prints a short summary of each.
//!
//!     cargo run --example layouts

use std::f64::consts::PI;

use patchy_rx::geometry::{fibonacci_layout, random_layout, region_layout};
use patchy_rx::{explicit_layout, PatchDescriptor, PatchLayout, Vec3};

fn summary(name: &str, layout: &PatchLayout) {
    let min_gap = layout
        .patches()
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            layout.patches()[i + 1..].iter().map(move |q| p.center().angle_to(q.center()) - p.alpha() - q.alpha())
        })
        .fold(f64::INFINITY, f64::min);
    println!(
        "{name:<13} N_p={:<3} coverage={:.4} a_1={:.4} um  smallest edge gap={:.4} rad",
        layout.len(),
        layout.coverage(),
        layout.patches()[0].a(),
        min_gap
    );
}

fn main() -> patchy_rx::Result<()> {
    let r_r = 10.0;
    let even = fibonacci_layout(13, 0.1, r_r)?;
    summary("fibonacci", &even);
    summary("random", &random_layout(13, 0.1, r_r, 7)?);
    summary("region", &region_layout(13, 0.1, r_r, PI, 1.0)?);

    let explicit = explicit_layout(
        &[
            PatchDescriptor { theta: PI / 2.0, phi: 0.0, a: 2.0 },
            PatchDescriptor { theta: PI / 2.0, phi: PI, a: 3.5 },
        ],
        r_r,
    )?;
    summary("explicit", &explicit);

    // which patch, if any, a direction from the centre lands on
    for dir in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)] {
        println!("direction {:?} -> patch {:?}", dir, explicit.hit(dir));
    }

    // layouts serialise to a small JSON file that the CLI reads back
    println!("{}", explicit.to_json()?);
    assert_eq!(PatchLayout::from_json(&explicit.to_json()?)?, explicit);

    // a 0.3295 rad polar cap is too small for 13 patches at 10% coverage
    match region_layout(13, 0.1, r_r, PI, 0.3295) {
        Err(e) => println!("cap of 0.3295 rad: {e}"),
        Ok(_) => println!("cap of 0.3295 rad unexpectedly fitted"),
    }
    Ok(())
}
