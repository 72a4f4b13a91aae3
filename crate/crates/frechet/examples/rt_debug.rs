fn main() {
    let pair = frechet::cli::parse_vec("(2, 5)").unwrap().shape().unwrap();
    let hinted = frechet::cli::parse_fun_at(
        "ln . proj 1 + (proj 1 * proj 2) - sin . proj 2",
        Some(&pair),
    ).unwrap();
    let printed = frechet::cli::print_fun(&hinted);
    println!("printed:\n{printed}\n");
    match frechet::cli::parse_fun(&printed) {
        Ok(back) => {
            if back != hinted {
                let p2 = frechet::cli::print_fun(&back);
                println!("reprinted:\n{p2}\n");
                println!("equal reprint: {}", p2 == printed);
            } else { println!("equal"); }
        }
        Err(e) => println!("reparse error: {e}"),
    }
}
