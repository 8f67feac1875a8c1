fn main() {
    std::process::exit(noshow_sched::cli::main());
}
