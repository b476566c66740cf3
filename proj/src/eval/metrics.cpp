// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "taonet/error.hpp"

namespace taonet::eval {
namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) {
  if (p == r) return p;  // exact, where 2pr/(p+r) can be off by an ulp
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back().push_back(c);
    }
  }
  return out;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (std::size_t g = 0; g < size(); ++g) t += row_sum(g);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::uint64_t t = overflow[gold];
  for (auto c : counts[gold]) t += c;
  return t;
}

ConfusionMatrix confusion(std::span<const std::string> gold, std::span<const std::string> pred,
                          std::span<const std::string> preferred_order) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(gold.size()) + " gold labels vs " +
                                               std::to_string(pred.size()) + " predictions");
  }
  if (gold.empty()) throw Error(ErrorCode::kLengthMismatch, "no label pairs");

  ConfusionMatrix m;
  for (const auto& l : preferred_order) {
    if (std::find(gold.begin(), gold.end(), l) != gold.end() &&
        std::find(m.labels.begin(), m.labels.end(), l) == m.labels.end()) {
      m.labels.push_back(l);
    }
  }
  for (const auto& l : gold) {
    if (std::find(m.labels.begin(), m.labels.end(), l) == m.labels.end()) m.labels.push_back(l);
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.labels.size(); ++i) index[m.labels[i]] = i;

  m.counts.assign(m.size(), std::vector<std::uint64_t>(m.size(), 0));
  m.overflow.assign(m.size(), 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t g = index.at(gold[i]);
    const auto p = index.find(pred[i]);
    if (p == index.end()) {
      ++m.overflow[g];
    } else {
      ++m.counts[g][p->second];
    }
  }
  return m;
}

MetricReport compute_metrics(const ConfusionMatrix& m) {
  if (m.size() == 0 || m.total() == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  MetricReport r;
  std::uint64_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    const std::uint64_t tp = m.counts[c][c];
    std::uint64_t fp = 0;
    for (std::size_t g = 0; g < m.size(); ++g) {
      if (g != c) fp += m.counts[g][c];
    }
    const std::uint64_t fn = m.row_sum(c) - tp;
    ClassMetrics k{m.labels[c], ratio(tp, tp + fp), ratio(tp, tp + fn), 0.0, m.row_sum(c)};
    k.f1 = harmonic(k.precision, k.recall);
    r.per_class.push_back(k);
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  const double n = static_cast<double>(m.size());
  for (const auto& k : r.per_class) {
    r.macro_precision += k.precision / n;
    r.macro_recall += k.recall / n;
    r.macro_f1 += k.f1 / n;
  }
  r.micro_precision = ratio(tp_all, tp_all + fp_all);
  r.micro_recall = ratio(tp_all, tp_all + fn_all);
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  r.accuracy = ratio(tp_all, m.total());
  return r;
}

std::vector<MetricSummary> aggregate_runs(std::span<const MetricReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyMatrix, "no reports to aggregate");
  const std::vector<std::pair<std::string, double MetricReport::*>> fields = {
      {"macro_precision", &MetricReport::macro_precision},
      {"macro_f1", &MetricReport::macro_f1},
      {"micro_f1", &MetricReport::micro_f1},
      {"recall", &MetricReport::macro_recall},
      {"accuracy", &MetricReport::accuracy}};
  std::vector<MetricSummary> out;
  const double n = static_cast<double>(reports.size());
  for (const auto& [name, field] : fields) {
    // Shifted by the first value so identical runs give exactly std 0.
    const double shift = reports.front().*field;
    double sum = 0.0, sq = 0.0;
    for (const auto& r : reports) {
      const double d = r.*field - shift;
      sum += d;
      sq += d * d;
    }
    const double var = std::max(0.0, (sq - sum * sum / n) / n);
    out.push_back({name, shift + sum / n, std::sqrt(var)});
  }
  return out;
}

std::string metrics_csv(const MetricReport& r) {
  std::ostringstream out;
  std::uint64_t total = 0;
  for (const auto& k : r.per_class) total += k.support;
  out << "scope,label,precision,recall,f1,support\n";
  out << "macro,," << fixed6(r.macro_precision) << ',' << fixed6(r.macro_recall) << ','
      << fixed6(r.macro_f1) << ',' << total << '\n';
  out << "micro,," << fixed6(r.micro_precision) << ',' << fixed6(r.micro_recall) << ','
      << fixed6(r.micro_f1) << ',' << total << '\n';
  for (const auto& k : r.per_class) {
    out << "class," << csv_field(k.label) << ',' << fixed6(k.precision) << ',' << fixed6(k.recall)
        << ',' << fixed6(k.f1) << ',' << k.support << '\n';
  }
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "gold\\predicted";
  for (const auto& l : m.labels) out << ',' << csv_field(l);
  out << ',' << kOverflowLabel << '\n';
  for (std::size_t g = 0; g < m.size(); ++g) {
    out << csv_field(m.labels[g]);
    for (auto c : m.counts[g]) out << ',' << c;
    out << ',' << m.overflow[g] << '\n';
  }
  return out.str();
}

std::string confusion_text(const ConfusionMatrix& m) {
  std::vector<std::string> header{"gold \\ predicted"};
  header.insert(header.end(), m.labels.begin(), m.labels.end());
  header.emplace_back(kOverflowLabel);
  std::vector<std::vector<std::string>> rows{header};
  for (std::size_t g = 0; g < m.size(); ++g) {
    std::vector<std::string> row{m.labels[g]};
    for (auto c : m.counts[g]) row.push_back(std::to_string(c));
    row.push_back(std::to_string(m.overflow[g]));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        out << row[i] << std::string(width[i] - row[i].size(), ' ');
      } else {
        out << "  " << std::string(width[i] - row[i].size(), ' ') << row[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string summary_csv(std::span<const MetricSummary> summary) {
  std::ostringstream out;
  out << "metric,mean,std\n";
  for (const auto& s : summary) out << s.name << ',' << fixed6(s.mean) << ',' << fixed6(s.stddev) << '\n';
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

void emit_report(const MetricReport& report, const ConfusionMatrix& matrix,
                 const std::filesystem::path& dir, const std::string& prefix) {
  write_text_file(dir / (prefix + "metrics.csv"), metrics_csv(report));
  write_text_file(dir / (prefix + "confusion.csv"), confusion_csv(matrix));
  write_text_file(dir / (prefix + "confusion.txt"), confusion_text(matrix));
}

MetricReport read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "scope,label,precision,recall,f1,support") {
    throw Error(ErrorCode::kSchemaViolation, path.string() + ": unexpected header");
  }
  MetricReport r;
  std::size_t lineno = 1;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      const auto f = split_csv_line(line);
      if (f.size() != 6) throw Error(ErrorCode::kSchemaViolation, "wrong field count");
      const double p = std::stod(f[2]), rec = std::stod(f[3]), f1 = std::stod(f[4]);
      if (f[0] == "macro") {
        r.macro_precision = p;
        r.macro_recall = rec;
        r.macro_f1 = f1;
      } else if (f[0] == "micro") {
        r.micro_precision = p;
        r.micro_recall = rec;
        r.micro_f1 = f1;
        r.accuracy = rec;
      } else if (f[0] == "class") {
        r.per_class.push_back({f[1], p, rec, f1, std::stoull(f[5])});
      } else {
        throw Error(ErrorCode::kSchemaViolation, "unknown scope " + f[0]);
      }
    }
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kSchemaViolation,
                path.string() + " line " + std::to_string(lineno) + ": " + e.what());
  }
  return r;
}

}  // namespace taonet::eval
