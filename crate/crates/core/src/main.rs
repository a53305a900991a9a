fn main() {
    std::process::exit(ccreduce::cli::main_with(std::env::args_os()));
}
