fn main() {
    std::process::exit(lockstrain::app::main_exit_code());
}
