fn main() {
    linkmetric::cli::main()
}
