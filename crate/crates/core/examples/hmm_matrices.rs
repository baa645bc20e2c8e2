//! Prints the transition and emission matrices for a small omega.
//!
//! cargo run --example hmm_matrices -- 2

use occucount::hmm::{build_state_space, Hmm, HmmParams};

fn main() {
    let omega: u32 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2);
    let params = HmmParams::default();
    let hmm = Hmm::new(&params, omega).expect("valid parameters");
    let (states, obs) = build_state_space(omega);
    let label = |w: u32, a: bool| format!("[{w},{}]", if a { 'T' } else { 'F' });

    println!("{params:?}\n\ntransitions");
    print!("{:>7}", "");
    for s in &states {
        print!("{:>7}", label(s.omega, s.alpha));
    }
    println!();
    for (i, s) in states.iter().enumerate() {
        print!("{:>7}", label(s.omega, s.alpha));
        for x in hmm.transitions().row(i) {
            print!("{x:>7.3}");
        }
        println!();
    }

    println!("\nemissions");
    print!("{:>7}", "");
    for o in &obs {
        print!("{:>7}", label(o.delta, o.alpha));
    }
    println!();
    for (i, s) in states.iter().enumerate() {
        print!("{:>7}", label(s.omega, s.alpha));
        for x in hmm.emissions().row(i) {
            print!("{x:>7.3}");
        }
        println!();
    }
}
