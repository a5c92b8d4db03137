#include "gsp2p/lp_format.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gsp2p/errors.hpp"

namespace gsp2p::milp {

namespace {

std::string fmt_num(double v) {
  if (v == std::rint(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_terms(std::string& out,
                  const std::vector<std::pair<int, double>>& terms,
                  const std::vector<Variable>& vars) {
  bool first = true;
  int line_len = 0;
  for (const auto& [j, v] : terms) {
    if (v == 0.0) continue;
    std::string piece;
    if (first) {
      piece = (v < 0 ? "- " : "") + fmt_num(std::abs(v)) + " " + vars[j].name;
      first = false;
    } else {
      piece = std::string(v < 0 ? "- " : "+ ") + fmt_num(std::abs(v)) + " " +
              vars[j].name;
    }
    if (line_len + static_cast<int>(piece.size()) > 70) {
      out += "\n   ";
      line_len = 0;
    } else if (line_len > 0) {
      out += " ";
      ++line_len;
    }
    out += piece;
    line_len += static_cast<int>(piece.size());
  }
  if (first) out += "0";
}

struct Tokenizer {
  std::string text;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }

  bool eof() {
    skip_space();
    return pos >= text.size();
  }

  std::string peek_word() {
    const std::size_t save = pos;
    const std::string w = next();
    pos = save;
    return w;
  }

  std::string next() {
    skip_space();
    if (pos >= text.size()) return "";
    const char c = text[pos];
    if (c == '<' || c == '>' || c == '=') {
      std::size_t start = pos++;
      if (pos < text.size() && text[pos] == '=') ++pos;
      return text.substr(start, pos - start);
    }
    if (c == '+' || c == '-') {
      ++pos;
      return std::string(1, c);
    }
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace((unsigned char)text[pos]) &&
           text[pos] != '<' && text[pos] != '>' && text[pos] != '=' &&
           text[pos] != '+' && text[pos] != '-')
      ++pos;
    // Numbers may carry a signed exponent.
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-') &&
        pos > start &&
        (text[pos - 1] == 'e' || text[pos - 1] == 'E') &&
        std::isdigit((unsigned char)text[start])) {
      ++pos;
      while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
    }
    return text.substr(start, pos - start);
  }
};

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower((unsigned char)a[i]) != std::tolower((unsigned char)b[i]))
      return false;
  return true;
}

}  // namespace

std::string write_lp(const Model& model) {
  model.validate();
  std::string out;
  out += "\\ " + model.name + "\n";
  // Column-order hint so a re-parse reproduces the exact layout; standard
  // readers treat it as a comment.
  {
    std::string line = "\\ columns:";
    for (const auto& v : model.vars) {
      if (line.size() + v.name.size() + 1 > 78) {
        out += line + "\n";
        line = "\\ columns+";
      }
      line += " " + v.name;
    }
    out += line + "\n";
  }
  out += "Minimize\n obj: ";
  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < static_cast<int>(model.vars.size()); ++j)
      if (model.vars[j].obj != 0.0) terms.push_back({j, model.vars[j].obj});
    append_terms(out, terms, model.vars);
  }
  out += "\n";
  if (!model.rows.empty()) {
    out += "Subject To\n";
    for (const auto& row : model.rows) {
      out += " " + row.name + ": ";
      append_terms(out, row.coeffs, model.vars);
      switch (row.sense) {
        case RowSense::le: out += " <= "; break;
        case RowSense::ge: out += " >= "; break;
        case RowSense::eq: out += " = "; break;
      }
      out += fmt_num(row.rhs) + "\n";
    }
  }
  out += "Bounds\n";
  for (const auto& v : model.vars) {
    const bool lb_fin = std::isfinite(v.lb);
    const bool ub_fin = std::isfinite(v.ub);
    if (lb_fin && ub_fin && v.lb == v.ub)
      out += " " + v.name + " = " + fmt_num(v.lb) + "\n";
    else if (lb_fin && ub_fin)
      out += " " + fmt_num(v.lb) + " <= " + v.name + " <= " + fmt_num(v.ub) +
             "\n";
    else if (lb_fin && !ub_fin)
      out += " " + v.name + " >= " + fmt_num(v.lb) + "\n";
    else if (!lb_fin && ub_fin)
      out += " -inf <= " + v.name + " <= " + fmt_num(v.ub) + "\n";
    else
      out += " " + v.name + " free\n";
  }
  bool any_binary = false;
  for (const auto& v : model.vars) any_binary |= v.is_binary;
  if (any_binary) {
    out += "Binaries\n";
    std::string line;
    for (const auto& v : model.vars) {
      if (!v.is_binary) continue;
      if (line.size() + v.name.size() + 1 > 70) {
        out += " " + line + "\n";
        line.clear();
      }
      if (!line.empty()) line += " ";
      line += v.name;
    }
    if (!line.empty()) out += " " + line + "\n";
  }
  out += "End\n";
  return out;
}

void write_lp_file(const Model& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  f << write_lp(model);
  if (!f) throw Error(ErrorCode::io, "failed writing " + path);
}

Model parse_lp(const std::string& text) {
  Model model;
  std::unordered_map<std::string, int> index;
  const auto var_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int j = model.add_var(name, 0.0, kInf, 0.0, false);
    index.emplace(name, j);
    return j;
  };

  // Pre-register columns from the hint comments, then strip all comments.
  std::string body;
  {
    std::istringstream lines(text);
    std::string line;
    bool first_comment = true;
    while (std::getline(lines, line)) {
      if (!line.empty() && line[0] == '\\') {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> tag;
        if (tag == "columns:" || tag == "columns+") {
          std::string name;
          while (ls >> name) var_of(name);
        } else if (first_comment) {
          std::string rest;
          std::getline(ls, rest);
          model.name = tag + rest;
        }
        first_comment = false;
        continue;
      }
      body += line + "\n";
    }
  }

  Tokenizer tok{body};
  enum class Section { none, objective, rows, bounds, binaries };
  Section section = Section::none;

  const auto read_num = [&]() {
    std::string w = tok.next();
    double sign = 1.0;
    while (w == "-" || w == "+") {
      if (w == "-") sign = -sign;
      w = tok.next();
    }
    if (iequals(w, "inf") || iequals(w, "infinity")) return sign * kInf;
    if (!is_number(w)) throw Error(ErrorCode::parse, "expected number, got " + w);
    return sign * std::strtod(w.c_str(), nullptr);
  };

  // Reads "[name:] terms" up to a sense token or section keyword.
  const auto parse_terms =
      [&](std::vector<std::pair<int, double>>* terms, std::string* stop) {
        double sign = 1.0;
        double coef = 1.0;
        bool coef_set = false;
        while (!tok.eof()) {
          const std::string w = tok.peek_word();
          if (w == "<=" || w == ">=" || w == "=" || iequals(w, "Subject") ||
              iequals(w, "Bounds") || iequals(w, "Binaries") ||
              iequals(w, "End") || iequals(w, "st")) {
            *stop = w;
            return;
          }
          tok.next();
          if (w == "+") continue;
          if (w == "-") {
            sign = -sign;
            continue;
          }
          if (is_number(w)) {
            coef = std::strtod(w.c_str(), nullptr);
            coef_set = true;
            continue;
          }
          const double value = sign * (coef_set ? coef : 1.0);
          if (!(value == 0.0 && coef_set))
            terms->push_back({var_of(w), value});
          else
            var_of(w);
          sign = 1.0;
          coef = 1.0;
          coef_set = false;
        }
        stop->clear();
      };

  while (!tok.eof()) {
    const std::string w = tok.peek_word();
    if (iequals(w, "Minimize") || iequals(w, "min")) {
      tok.next();
      section = Section::objective;
      continue;
    }
    if (iequals(w, "Subject")) {
      tok.next();
      tok.next();  // "To"
      section = Section::rows;
      continue;
    }
    if (iequals(w, "Bounds")) {
      tok.next();
      section = Section::bounds;
      continue;
    }
    if (iequals(w, "Binaries") || iequals(w, "Binary")) {
      tok.next();
      section = Section::binaries;
      continue;
    }
    if (iequals(w, "End")) break;

    switch (section) {
      case Section::objective: {
        std::string name = tok.next();  // "obj:" or "obj" ":"
        if (!name.empty() && name.back() == ':') name.pop_back();
        if (tok.peek_word() == ":") tok.next();
        std::vector<std::pair<int, double>> terms;
        std::string stop;
        parse_terms(&terms, &stop);
        for (const auto& [j, v] : terms) model.vars[j].obj += v;
        section = Section::none;
        break;
      }
      case Section::rows: {
        std::string name = tok.next();
        if (!name.empty() && name.back() == ':') name.pop_back();
        if (tok.peek_word() == ":") tok.next();
        std::vector<std::pair<int, double>> terms;
        std::string stop;
        parse_terms(&terms, &stop);
        if (stop != "<=" && stop != ">=" && stop != "=")
          throw Error(ErrorCode::parse, "row " + name + ": missing sense");
        tok.next();
        std::string rhs_tok = tok.next();
        double rhs_sign = 1.0;
        while (rhs_tok == "-" || rhs_tok == "+") {
          if (rhs_tok == "-") rhs_sign = -rhs_sign;
          rhs_tok = tok.next();
        }
        if (!is_number(rhs_tok))
          throw Error(ErrorCode::parse, "row " + name + ": bad rhs");
        const RowSense sense = stop == "<=" ? RowSense::le
                               : stop == ">=" ? RowSense::ge
                                              : RowSense::eq;
        model.add_row(name, sense,
                      rhs_sign * std::strtod(rhs_tok.c_str(), nullptr),
                      std::move(terms));
        break;
      }
      case Section::bounds: {
        // Forms: "l <= x <= u" | "-inf <= x <= u" | "x >= l" | "x <= u"
        //        | "x = v" | "x free"
        std::string first = tok.next();
        double first_sign = 1.0;
        while (first == "-" || first == "+") {
          if (first == "-") first_sign = -first_sign;
          first = tok.next();
        }
        if (is_number(first) || iequals(first, "inf") ||
            iequals(first, "infinity")) {
          double lo = iequals(first, "inf") || iequals(first, "infinity")
                          ? first_sign * kInf
                          : first_sign * std::strtod(first.c_str(), nullptr);
          if (tok.next() != "<=")
            throw Error(ErrorCode::parse, "bounds: expected <=");
          const int j = var_of(tok.next());
          model.vars[j].lb = lo;
          if (tok.peek_word() == "<=") {
            tok.next();
            model.vars[j].ub = read_num();
          }
        } else {
          const int j = var_of(first);
          const std::string op = tok.next();
          if (iequals(op, "free")) {
            model.vars[j].lb = -kInf;
            model.vars[j].ub = kInf;
          } else if (op == ">=") {
            model.vars[j].lb = read_num();
            model.vars[j].ub = kInf;
          } else if (op == "<=") {
            model.vars[j].ub = read_num();
          } else if (op == "=") {
            const double v = read_num();
            model.vars[j].lb = v;
            model.vars[j].ub = v;
          } else {
            throw Error(ErrorCode::parse, "bounds: unexpected token " + op);
          }
        }
        break;
      }
      case Section::binaries: {
        const int j = var_of(tok.next());
        model.vars[j].is_binary = true;
        if (model.vars[j].ub > 1.0 || !std::isfinite(model.vars[j].ub))
          model.vars[j].ub = 1.0;
        if (model.vars[j].lb < 0.0) model.vars[j].lb = 0.0;
        break;
      }
      case Section::none:
        throw Error(ErrorCode::parse, "unexpected token " + tok.next());
    }
  }
  return model;
}

Model read_lp_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_lp(ss.str());
}

}  // namespace gsp2p::milp
