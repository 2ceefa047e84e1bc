#pragma once

// Line-oriented MDP files and value exports.
//
//   mdp n=<int> gamma=<decimal> actions=<int> sink=<int|none>
//   action <name>
//   t <i> <j> <prob>        raw probability, before discounting
//   r <i> <value>
//   end
//   checksum <16 hex digits>   optional, FNV-1a 64 of every preceding byte
//
// '#' starts a comment. Numbers are written with 17 significant digits so a
// save/load round trip reproduces every stored double.

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "hvi/model.hpp"

namespace hvi {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : IoError {
  ParseError(int line, int column, const std::string& what);
  int line;
  int column;
};

using StateDescriber = std::function<std::string(Index)>;

void write_mdp(std::ostream& out, const Mdp<double>& mdp);
Mdp<double> read_mdp(std::istream& in);

void save_mdp(const std::string& path, const Mdp<double>& mdp);
Mdp<double> load_mdp(const std::string& path);

/// One line per state: index, semantic tuple (empty without a describer),
/// value.
void write_value(std::ostream& out, const ValueFunction<double>& v, const StateDescriber& describe = {});
ValueFunction<double> read_value(std::istream& in);

void export_value(const std::string& path, const ValueFunction<double>& v, const StateDescriber& describe = {});
ValueFunction<double> import_value(const std::string& path);

/// 17-significant-digit decimal.
std::string format_double(double x);

}  // namespace hvi
