use sixsoid::*;

fn main() {
    let plan = SamplePlan::new(10_000_000, 7);
    let tiling = sample_coverage_cube(1.0, &plan, ArrangementMode::TilingNeighborhood).unwrap();
    println!("tiling: n_spheres={} >=4 {:.6} >=5 {:.6} >=6 {:.6} >=7 {:.6} exact3 {:.6}",
        "?", tiling.at_least_fraction(4), tiling.at_least_fraction(5), tiling.at_least_fraction(6),
        tiling.at_least_fraction(7), tiling.exact_fraction(3));
    let cell = CubeCell::unit();
    let arr = SensorArrangement::tiling_neighborhood(&cell);
    println!("tiling sphere count: {}", arr.len());

    // Center cell of a 5x5x5 grid with the full deployment plan
    let foi = FoiGrid::full_box(1.0, [5,5,5]).unwrap();
    let dplan = enumerate_sensors(&foi).unwrap();
    let center = FoiGrid::new(1.0, [[2,2,2]]).unwrap();
    let stats = coverage_stats(&dplan, &center, &SamplePlan::new(2_000_000, 7)).unwrap();
    println!("center cell of 5^3 with full plan: >=4 {:.6} >=6 {:.6} exact3 {:.6} min {}",
        stats.at_least_fraction(4), stats.at_least_fraction(6), stats.exact_fraction(3), stats.min_observed());

    // whole 5^3 grid
    let whole = coverage_stats(&dplan, &foi, &SamplePlan::new(2_000_000, 7)).unwrap();
    println!("whole 5^3 grid: >=4 {:.6} >=6 {:.6} min {}", whole.at_least_fraction(4), whole.at_least_fraction(6), whole.min_observed());
}
