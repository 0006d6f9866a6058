fn main() {
    // CLI wired up once the experiment layer lands.
}
