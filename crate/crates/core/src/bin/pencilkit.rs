fn main() {
    std::process::exit(pencilkit::cli::main());
}
