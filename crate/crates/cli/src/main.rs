fn main() {
    l1rec::init_logging();
    std::process::exit(l1rec::run(std::env::args_os()));
}
