#include "hvi/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace hvi {

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

/// Raw probability p with gamma * p reproducing the stored discounted entry
/// exactly, so that loading (which multiplies by gamma) is lossless.
double undiscount(double stored, double gamma) {
  if (gamma == 1.0) return stored;
  double p = stored / gamma;
  for (int k = 0; k < 8 && gamma * p != stored; ++k)
    p = std::nextafter(p, gamma * p < stored ? INFINITY : -INFINITY);
  if (gamma * p != stored) throw IoError("save_mdp: probability " + format_double(stored) + " not representable");
  return p;
}

struct Token {
  std::string_view text;
  int column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '#') ++i;
    out.push_back({line.substr(b, i - b), int(b) + 1});
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string text) : text_(std::move(text)) {}

  Mdp<double> run();

 private:
  [[noreturn]] void fail(int column, const std::string& what) const { throw ParseError(std::max(line_no_, 1), column, what); }

  bool next_line(std::vector<Token>& toks) {
    while (pos_ < text_.size()) {
      line_start_ = pos_;
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::string_view line(text_.data() + pos_, end - pos_);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      pos_ = end + 1;
      ++line_no_;
      toks = tokenize(line);
      if (!toks.empty()) return true;
    }
    line_start_ = text_.size();
    return false;
  }

  template <typename T>
  T number(const Token& t, std::string_view what) const {
    T v{};
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail(t.column, "expected " + std::string(what) + ", got '" + std::string(t.text) + "'");
    return v;
  }

  /// key=value field of the header.
  std::string_view field(const Token& t, std::string_view key) const {
    if (t.text.size() <= key.size() + 1 || t.text.substr(0, key.size()) != key || t.text[key.size()] != '=')
      fail(t.column, "expected " + std::string(key) + "=<value>");
    return t.text.substr(key.size() + 1);
  }

  Index index(const Token& t, Index n) const {
    const auto i = number<long long>(t, "state index");
    if (i < 0 || i >= n) fail(t.column, "state index " + std::to_string(i) + " out of range");
    return Index(i);
  }

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_no_ = 0;
};

Mdp<double> Parser::run() {
  std::vector<Token> toks;
  if (!next_line(toks)) fail(1, "empty file");
  if (toks.size() != 5 || toks[0].text != "mdp") fail(toks[0].column, "header must be 'mdp n=.. gamma=.. actions=.. sink=..'");
  auto sub = [](const Token& t, std::string_view v) {
    return Token{v, t.column + int(v.data() - t.text.data())};
  };
  const auto n = number<long long>(sub(toks[1], field(toks[1], "n")), "state count");
  const auto gamma = number<double>(sub(toks[2], field(toks[2], "gamma")), "discount");
  const auto actions = number<long long>(sub(toks[3], field(toks[3], "actions")), "action count");
  const std::string_view sink_text = field(toks[4], "sink");
  if (n < 0) fail(toks[1].column, "state count must be non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail(toks[2].column, "gamma must lie in (0, 1]");
  if (actions < 1) fail(toks[3].column, "at least one action required");
  std::optional<Index> sink;
  if (sink_text != "none") sink = index(sub(toks[4], sink_text), Index(n));

  std::vector<std::string> names;
  std::vector<MatrixModel<double>> models;
  for (long long a = 0; a < actions; ++a) {
    if (!next_line(toks)) fail(1, "missing action block " + std::to_string(a));
    if (toks.size() != 2 || toks[0].text != "action") fail(toks[0].column, "expected 'action <name>'");
    names.emplace_back(toks[1].text);
    const int action_line = line_no_;
    VectorX<double> reward = VectorX<double>::Zero(n);
    std::vector<Eigen::Triplet<double, std::int64_t>> t;
    while (true) {
      if (!next_line(toks)) fail(1, "unterminated action block");
      const auto& kind = toks[0].text;
      if (kind == "end") {
        if (toks.size() != 1) fail(toks[1].column, "unexpected text after 'end'");
        break;
      }
      if (kind == "t") {
        if (toks.size() != 4) fail(toks[0].column, "expected 't <i> <j> <prob>'");
        t.emplace_back(index(toks[1], n), index(toks[2], n), number<double>(toks[3], "probability"));
      } else if (kind == "r") {
        if (toks.size() != 3) fail(toks[0].column, "expected 'r <i> <value>'");
        reward[index(toks[1], n)] = number<double>(toks[2], "reward");
      } else {
        fail(toks[0].column, "unknown record '" + std::string(kind) + "'");
      }
    }
    RowMajorSparse<double> p(n, n);
    p.setFromTriplets(t.begin(), t.end());
    try {
      models.push_back(make_model<double>(reward, p, gamma));
    } catch (const std::invalid_argument& e) {
      line_no_ = action_line;
      fail(1, e.what());
    }
  }

  if (next_line(toks)) {
    if (toks[0].text != "checksum" || toks.size() != 2) fail(toks[0].column, "expected 'checksum <hex>' or end of file");
    const std::string expected = hex64(fnv1a(std::string_view(text_).substr(0, line_start_)));
    if (toks[1].text != expected)
      fail(toks[1].column, "checksum mismatch (file says " + std::string(toks[1].text) + ", content hashes to " +
                               expected + ")");
    if (next_line(toks)) fail(toks[0].column, "unexpected text after checksum");
  }
  try {
    return Mdp<double>(gamma, std::move(names), std::move(models), sink);
  } catch (const std::invalid_argument& e) {
    throw ParseError(1, 1, e.what());
  }
}

}  // namespace

ParseError::ParseError(int line_, int column_, const std::string& what)
    : IoError("line " + std::to_string(line_) + ", column " + std::to_string(column_) + ": " + what),
      line(line_),
      column(column_) {}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_mdp(std::ostream& out, const Mdp<double>& mdp) {
  std::ostringstream body;
  body << "mdp n=" << mdp.size() << " gamma=" << format_double(mdp.gamma()) << " actions=" << mdp.action_count()
       << " sink=" << (mdp.sink() ? std::to_string(*mdp.sink()) : std::string("none")) << '\n';
  for (Index a = 0; a < mdp.action_count(); ++a) {
    const std::string& name = mdp.name(a);
    if (name.empty() || name.find_first_of(" \t\r\n#") != std::string::npos)
      throw IoError("save_mdp: action name '" + name + "' must be a single word");
    body << "action " << name << '\n';
    const auto& m = mdp.action(a);
    for (Index i = 0; i < m.size(); ++i) {
      if (m.reward()[i] != 0.0) body << "r " << i << ' ' << format_double(m.reward()[i]) << '\n';
      m.row(i).for_each([&](Index j, double p) {
        if (p != 0.0) body << "t " << i << ' ' << j << ' ' << format_double(undiscount(p, mdp.gamma())) << '\n';
      });
    }
    body << "end\n";
  }
  const std::string text = body.str();
  out << text << "checksum " << hex64(fnv1a(text)) << '\n';
}

Mdp<double> read_mdp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parser(ss.str()).run();
}

void save_mdp(const std::string& path, const Mdp<double>& mdp) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write_mdp(f, mdp);
  if (!f.flush()) throw IoError("write to '" + path + "' failed");
}

Mdp<double> load_mdp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  return read_mdp(f);
}

void write_value(std::ostream& out, const ValueFunction<double>& v, const StateDescriber& describe) {
  for (Index i = 0; i < v.size(); ++i) {
    out << i << ',';
    if (describe) out << describe(i);
    out << ',' << format_double(v[i]) << '\n';
  }
}

ValueFunction<double> read_value(std::istream& in) {
  std::vector<double> vals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto first = line.find(','), last = line.rfind(',');
    if (first == std::string::npos || first == last) throw ParseError(line_no, 1, "expected '<index>,<tuple>,<value>'");
    long long idx = -1;
    auto [p, ec] = std::from_chars(line.data(), line.data() + first, idx);
    if (ec != std::errc() || p != line.data() + first || idx != static_cast<long long>(vals.size()))
      throw ParseError(line_no, 1, "expected index " + std::to_string(vals.size()));
    double x = 0;
    const char* b = line.data() + last + 1;
    const char* e = line.data() + line.size();
    auto [q, ec2] = std::from_chars(b, e, x);
    if (ec2 != std::errc() || q != e) throw ParseError(line_no, int(last) + 2, "malformed value");
    vals.push_back(x);
  }
  return ValueFunction<double>(Eigen::Map<const VectorX<double>>(vals.data(), Index(vals.size())));
}

void export_value(const std::string& path, const ValueFunction<double>& v, const StateDescriber& describe) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write_value(f, v, describe);
  if (!f.flush()) throw IoError("write to '" + path + "' failed");
}

ValueFunction<double> import_value(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  return read_value(f);
}

}  // namespace hvi
