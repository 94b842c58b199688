//! Gnuplot scripts reading result.csv. Columns are 1-based.

/// Script for `protocol`, or `None` when no standard plot exists.
pub fn gnuplot_script(protocol: &str) -> Option<String> {
    let body = match protocol {
        "wigner" => "set xlabel '|alpha|'\nset ylabel 'W'\nplot 'result.csv' using 3:4:5 with yerrorbars title 'W(alpha)'\n",
        "swaptest" => "set xlabel 'phi (rad)'\nset ylabel 'P'\nplot 'result.csv' using 1:2:3 with yerrorbars title 'P(phi)'\n",
        "overlap" => "set xlabel 'n'\nset ylabel 'm'\nset view map\nsplot 'result.csv' using 1:2:3 with points pointtype 5 palette title 'contrast'\n",
        "coherent" => "set xlabel 'n'\nset ylabel 'P(n)'\nplot 'result.csv' using 1:2:3 with yerrorbars title 'populations'\n",
        "fredkin" => "set xlabel 'input'\nset ylabel 'output'\nset view map\nsplot 'result.csv' using 1:2:3 with points pointtype 5 palette title 'P(out|in)'\n",
        "noon" => "set xlabel 'x'\nset ylabel 'signal'\nplot 'result.csv' using ($1==0?$2:1/0):3:4 with yerrorbars title 'joint sideband', \\\n     'result.csv' using ($1==1?$2:1/0):3:4 with yerrorbars title 'parity'\n",
        _ => return None,
    };
    Some(format!("set datafile separator ','\nset key autotitle columnhead\n{body}"))
}
