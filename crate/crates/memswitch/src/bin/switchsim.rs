fn main() {
    env_logger::init();
    std::process::exit(memswitch::cli::sim::main());
}
