//! Which initial pair of states shows the largest backflow of information.

use nmdephasing::channel::{coherent_backflow, optimal_pair_search, plus_plus_minus_minus, trace_distance, Register};

fn main() -> nmdephasing::Result<()> {
    for gamma in [0.2, 0.7, -0.4] {
        let single = optimal_pair_search(gamma, 100, Register::SingleQubit)?;
        let a = single.pair.first.entry(0, 1);
        let b = single.pair.second.entry(0, 1);
        println!("Γ = {gamma}");
        println!(
            "  one qubit: D = {:.9} over {} candidates, coherences {:.3} and {:.3}",
            single.distance, single.candidates, a, b
        );
        let two = optimal_pair_search(gamma, 100, Register::TwoQubit)?;
        let reference = plus_plus_minus_minus();
        println!(
            "  two qubits: best backflow {:.9}; |++>, |--> gives {:.9} (D before dephasing {})",
            two.backflow,
            coherent_backflow(&reference, gamma)?,
            trace_distance(&reference)?
        );
    }
    Ok(())
}
