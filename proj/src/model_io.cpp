#include <cstdio>
#include <fstream>
#include <sstream>

#include "texwave/error.hpp"
#include "texwave/svm.hpp"

namespace texwave {

namespace {

constexpr const char* kMagic = "TEXWAVE-SVM v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_values(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) out << ' ' << fmt(x);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void skip_line() { ++line_no_; }

  std::istringstream raw_line(const std::string& what) {
    std::string text;
    ++line_no_;
    if (!std::getline(in_, text)) fail("unexpected end of file, expected " + what);
    return std::istringstream(text);
  }

  std::istringstream line(const std::string& key) {
    auto ls = raw_line("'" + key + "'");
    std::string word;
    ls >> word;
    if (word != key) fail("expected '" + key + "', found '" + word + "'");
    return ls;
  }

  template <class T>
  T value(std::istringstream& ls, const std::string& what) {
    T v{};
    if (!(ls >> v)) fail("bad " + what);
    return v;
  }

  std::vector<double> values(std::istringstream& ls, std::size_t n, const std::string& what) {
    std::vector<double> v(n);
    for (auto& x : v) x = value<double>(ls, what);
    std::string extra;
    if (ls >> extra) fail("trailing data after " + what);
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse, "model file line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const SvmModel& model) {
  out << kMagic << '\n';
  out << "transform " << to_string(model.layout.transform) << '\n';
  out << "levels " << model.layout.levels << '\n';
  out << "layout " << model.layout.tag() << '\n';
  out << "tree_b_rule " << model.tree_b_rule << '\n';
  out << "classes " << model.classes.size();
  for (const auto& c : model.classes) {
    if (c.empty() || c.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error(ErrorKind::Config, "class name '" + c + "' must be non-empty without whitespace");
    }
    out << ' ' << c;
  }
  out << '\n';
  out << "dimension " << model.standardizer.dimension() << '\n';
  out << "mean";
  write_values(out, model.standardizer.mean);
  out << "\nstd";
  write_values(out, model.standardizer.stddev);
  out << "\nparams " << fmt(model.params.c) << ' ' << fmt(model.params.gamma) << '\n';
  out << "machines " << model.machines.size() << '\n';
  for (const PairMachine& m : model.machines) {
    out << "machine " << m.first << ' ' << m.second << '\n';
    out << "c " << fmt(m.svm.params.c) << " gamma " << fmt(m.svm.params.gamma) << '\n';
    out << "bias " << fmt(m.svm.bias) << '\n';
    out << "support_vectors " << m.svm.support_vectors.size() << '\n';
    for (std::size_t i = 0; i < m.svm.support_vectors.size(); ++i) {
      out << fmt(m.svm.coef[i]);
      write_values(out, m.svm.support_vectors[i]);
      out << '\n';
    }
  }
  out << "end\n";
}

SvmModel read_model(std::istream& in) {
  Reader rd(in);
  {
    std::string magic;
    if (!std::getline(in, magic) || magic != kMagic) {
      throw Error(ErrorKind::Parse, "model file line 1: missing '" + std::string(kMagic) + "' header");
    }
  }
  rd.skip_line();
  SvmModel m;
  {
    auto ls = rd.line("transform");
    try {
      m.layout.transform = parse_transform(rd.value<std::string>(ls, "transform"));
    } catch (const Error& e) {
      rd.fail(e.what());
    }
  }
  {
    auto ls = rd.line("levels");
    m.layout.levels = rd.value<int>(ls, "levels");
    if (m.layout.levels < 1) rd.fail("levels must be >= 1");
  }
  {
    auto ls = rd.line("layout");
    const auto tag = rd.value<std::string>(ls, "layout");
    if (tag != m.layout.tag()) rd.fail("layout '" + tag + "' does not match transform (expected '" + m.layout.tag() + "')");
  }
  {
    auto ls = rd.line("tree_b_rule");
    m.tree_b_rule = rd.value<std::string>(ls, "tree_b_rule");
  }
  {
    auto ls = rd.line("classes");
    const auto k = rd.value<std::size_t>(ls, "class count");
    if (k < 2) rd.fail("need at least 2 classes");
    for (std::size_t i = 0; i < k; ++i) m.classes.push_back(rd.value<std::string>(ls, "class name"));
  }
  std::size_t dim = 0;
  {
    auto ls = rd.line("dimension");
    dim = rd.value<std::size_t>(ls, "dimension");
    if (dim != static_cast<std::size_t>(m.layout.dimension())) rd.fail("dimension does not match layout");
  }
  {
    auto ls = rd.line("mean");
    m.standardizer.mean = rd.values(ls, dim, "mean");
  }
  {
    auto ls = rd.line("std");
    m.standardizer.stddev = rd.values(ls, dim, "std");
  }
  {
    auto ls = rd.line("params");
    m.params.c = rd.value<double>(ls, "C");
    m.params.gamma = rd.value<double>(ls, "gamma");
  }
  std::size_t count = 0;
  {
    auto ls = rd.line("machines");
    count = rd.value<std::size_t>(ls, "machine count");
    const std::size_t k = m.classes.size();
    if (count != k * (k - 1) / 2) rd.fail("expected " + std::to_string(k * (k - 1) / 2) + " machines");
  }
  for (std::size_t t = 0; t < count; ++t) {
    PairMachine pm;
    {
      auto ls = rd.line("machine");
      pm.first = rd.value<int>(ls, "class index");
      pm.second = rd.value<int>(ls, "class index");
      const int k = static_cast<int>(m.classes.size());
      if (pm.first < 0 || pm.second >= k || pm.first >= pm.second) rd.fail("bad class pair");
    }
    {
      auto ls = rd.line("c");
      pm.svm.params.c = rd.value<double>(ls, "C");
      std::string key;
      ls >> key;
      if (key != "gamma") rd.fail("expected 'gamma'");
      pm.svm.params.gamma = rd.value<double>(ls, "gamma");
    }
    {
      auto ls = rd.line("bias");
      pm.svm.bias = rd.value<double>(ls, "bias");
    }
    std::size_t nsv = 0;
    {
      auto ls = rd.line("support_vectors");
      nsv = rd.value<std::size_t>(ls, "support vector count");
    }
    for (std::size_t i = 0; i < nsv; ++i) {
      auto ls = rd.raw_line("support vector");
      auto row = rd.values(ls, dim + 1, "support vector");
      pm.svm.coef.push_back(row[0]);
      pm.svm.support_vectors.emplace_back(row.begin() + 1, row.end());
    }
    m.machines.push_back(std::move(pm));
  }
  rd.line("end");
  return m;
}

void save_model(const std::string& path, const SvmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_model(out, model);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

SvmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open model '" + path + "'");
  return read_model(in);
}

}  // namespace texwave
