#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace meal {

/// Command-line surface. args excludes the program name. Returns 0 on
/// success, 1 on usage errors (usage text goes to err), 2 on runtime errors.
///
/// Subcommands:
///   gen-data <config>
///   train-teacher <config> --out <ckpt> [--index N]
///   meal-train <config> --zoo <ckpt...> --out <ckpt>
///   eval <ckpt> <dataset.csv>
///   ensemble-eval --zoo <ckpt...> <dataset.csv>
///   ablate <config>
///   dump-config
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);

int cli_dispatch(int argc, char** argv);

}  // namespace meal
