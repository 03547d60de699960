macro_rules! example_test {
    ($module:ident, $test:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(kronecker_chain, kronecker_chain_runs, "kronecker_chain.rs");
example_test!(
    pseudospectra_grid,
    pseudospectra_grid_runs,
    "pseudospectra_grid.rs"
);
example_test!(
    distance_to_singularity,
    distance_to_singularity_runs,
    "distance_to_singularity.rs"
);
example_test!(
    approximate_sequences,
    approximate_sequences_runs,
    "approximate_sequences.rs"
);
example_test!(dh_structure, dh_structure_runs, "dh_structure.rs");
example_test!(
    odae_nonuniqueness,
    odae_nonuniqueness_runs,
    "odae_nonuniqueness.rs"
);
example_test!(power_balance, power_balance_runs, "power_balance.rs");
example_test!(
    singular_functions,
    singular_functions_runs,
    "singular_functions.rs"
);
example_test!(pencil_json, pencil_json_runs, "pencil_json.rs");
