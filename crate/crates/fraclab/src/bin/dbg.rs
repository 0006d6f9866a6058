use fraclab::kernel::*;
use fraclab::grid::FarField;
fn main() {
    let s = 0.3;
    let sigma = fraclab::params::sigma_ns(2, s);
    let h = 1.0/16.0;
    let k: i64 = 48;
    for z in [0.01f64, 0.2] {
        for exact_r in [4i64, 8, 16, 32] {
            let mut lattice = 0.0;
            for dy in -2*k..=2*k { for dx in -2*k..=2*k {
                lattice += poisson_cell_weight_2d(dx, dy, h, z, s, sigma, exact_r);
            }}
            let rb = (2*k) as f64 * h + 0.5*h;
            let tail = angular_tail_integral(&FarField::Uniform(1.0), [0.0,0.0], rb,
                &|t| poisson_radial_mass_2d(t, z, s, sigma));
            println!("z={z} exact_r={exact_r}: total-1 = {:+.3e}  (lattice {lattice:.9}, tail {tail:.3e})", lattice+tail-1.0);
        }
    }
}
