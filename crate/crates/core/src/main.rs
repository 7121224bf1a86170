fn main() {
    std::process::exit(onofri_lab::cli::main_from_env());
}
