// Copyright 2026 The FedSel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedsel/datasets.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <system_error>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "fedsel/rng.h"

namespace fedsel {
namespace {

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return absl::DataLossError(absl::StrCat("read error: ", path));
  return ss.str();
}

absl::string_view Trim(absl::string_view s) {
  return absl::StripAsciiWhitespace(s);
}

// Min-max scales column `col` of a row-major matrix to [-1, 1].
void ScaleColumn(std::vector<double>& rows, std::size_t n, int d, int col) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, rows[i * d + col]);
    hi = std::max(hi, rows[i * d + col]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double& v = rows[i * d + col];
    v = hi > lo ? 2.0 * (v - lo) / (hi - lo) - 1.0 : 0.0;
  }
}

absl::StatusOr<int> ParseLabel(absl::string_view token) {
  double value;
  if (!absl::SimpleAtod(token, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("label '", token, "' is not a number"));
  }
  if (value == 1.0) return 1;
  if (value == 0.0 || value == -1.0) return -1;
  return absl::InvalidArgumentError(
      absl::StrCat("label '", token, "' is not one of -1, 0, +1"));
}

}  // namespace

absl::StatusOr<SyntheticData> GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.d < 1) {
    return absl::InvalidArgumentError("synthetic data needs n >= 1, d >= 1");
  }
  if (!(spec.c1 > 0.0 && spec.c1 <= 1.0) ||
      !(spec.c2 > 0.0 && spec.c2 <= 1.0)) {
    return absl::InvalidArgumentError("c1 and c2 must lie in (0, 1]");
  }
  Rng rng = MakeRng(spec.seed, Stream::kSynthetic);
  const int d = spec.d;
  const int informative = std::max(
      1, static_cast<int>(std::floor(spec.c1 * d + 1e-9)));

  SyntheticData out;
  out.w_star.assign(d, 0.0);
  std::vector<int> positions(d);
  std::iota(positions.begin(), positions.end(), 0);
  for (int i = 0; i < informative; ++i) {
    const auto pick = i + static_cast<int>(UniformIndex(rng, d - i));
    std::swap(positions[i], positions[pick]);
    double w = 0.0;
    while (w == 0.0) w = StandardNormal(rng);
    out.w_star[positions[i]] = w;
  }

  out.data = Dataset(absl::StrCat("syn-", d), d);
  out.flipped.resize(spec.n);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (double& v : x) v = 2.0 * Uniform01(rng) - 1.0;
    int y = 0;
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += out.w_star[j] * x[j];
    y = dot >= 0.0 ? 1 : -1;
    if (Uniform01(rng) >= spec.c2) {
      y = -y;
      out.flipped[i] = 1;
    }
    out.data.Add(x, y);
  }
  return out;
}

absl::StatusOr<SyntheticSpec> ParseSyntheticSpec(absl::string_view text) {
  std::vector<absl::string_view> parts = absl::StrSplit(text, ',');
  if (parts.size() < 4 || parts.size() > 5) {
    return absl::InvalidArgumentError(absl::StrCat(
        "synthetic spec '", text, "' must be d,n,c1,c2[,seed]"));
  }
  SyntheticSpec spec;
  std::uint64_t n = 0;
  if (!absl::SimpleAtoi(Trim(parts[0]), &spec.d) ||
      !absl::SimpleAtoi(Trim(parts[1]), &n) ||
      !absl::SimpleAtod(Trim(parts[2]), &spec.c1) ||
      !absl::SimpleAtod(Trim(parts[3]), &spec.c2) ||
      (parts.size() == 5 && !absl::SimpleAtoi(Trim(parts[4]), &spec.seed))) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot parse synthetic spec '", text, "'"));
  }
  spec.n = n;
  return spec;
}

absl::StatusOr<Dataset> ParseSparseText(absl::string_view text,
                                        const LoadOptions& options,
                                        std::string name) {
  struct Row {
    int y;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<absl::string_view> tokens =
        absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
    absl::StatusOr<int> label = ParseLabel(tokens[0]);
    if (!label.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, ":", line_no, ": ", label.status().message()));
    }
    Row row{*label, {}};
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::size_t colon = tokens[t].find(':');
      int index = 0;
      double value = 0.0;
      if (colon == absl::string_view::npos ||
          !absl::SimpleAtoi(tokens[t].substr(0, colon), &index) ||
          !absl::SimpleAtod(tokens[t].substr(colon + 1), &value) ||
          !std::isfinite(value)) {
        return absl::InvalidArgumentError(absl::StrCat(
            name, ":", line_no, ": malformed feature '", tokens[t], "'"));
      }
      if (index < 1) {
        return absl::InvalidArgumentError(absl::StrCat(
            name, ":", line_no, ": feature index ", index, " is not >= 1"));
      }
      if (options.d > 0 && index > options.d) {
        return absl::InvalidArgumentError(
            absl::StrCat(name, ":", line_no, ": feature index ", index,
                         " exceeds dimension ", options.d));
      }
      max_index = std::max(max_index, index);
      row.entries.emplace_back(index - 1, value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, ": no examples found"));
  }
  const int d = options.d > 0 ? options.d : max_index;
  if (d < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, ": no features found"));
  }
  std::vector<double> dense(rows.size() * d, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i].entries) dense[i * d + j] = v;
  }
  for (int j = 0; j < d; ++j) {
    bool out_of_range = false;
    for (std::size_t i = 0; i < rows.size() && !out_of_range; ++i) {
      out_of_range = std::fabs(dense[i * d + j]) > 1.0;
    }
    if (out_of_range) ScaleColumn(dense, rows.size(), d, j);
  }
  Dataset ds(std::move(name), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.Add(std::span<const double>(dense).subspan(i * d, d), rows[i].y);
  }
  return ds;
}

absl::StatusOr<Dataset> LoadSparseText(const std::string& path,
                                       const LoadOptions& options) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  return ParseSparseText(*text, options, path);
}

absl::StatusOr<Dataset> ParseCsv(absl::string_view text,
                                 const std::string& label_column,
                                 std::string name) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    line = Trim(line);
    if (line.empty()) continue;
    std::vector<std::string> row;
    for (absl::string_view cell : absl::StrSplit(line, ',')) {
      row.emplace_back(Trim(cell));
    }
    if (header.empty()) {
      header = std::move(row);
      continue;
    }
    if (row.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, ":", line_no, ": expected ", header.size(),
                       " columns, found ", row.size()));
    }
    cells.push_back(std::move(row));
  }
  if (cells.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, ": no examples found"));
  }
  std::size_t label_col = header.size() - 1;
  if (!label_column.empty()) {
    auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, ": no column named '", label_column, "'"));
    }
    label_col = static_cast<std::size_t>(it - header.begin());
  }
  if (header.size() < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, ": need a label and at least one feature"));
  }

  auto is_numeric = [&](std::size_t col) {
    double v;
    for (const auto& row : cells) {
      if (!absl::SimpleAtod(row[col], &v) || !std::isfinite(v)) return false;
    }
    return true;
  };

  // Labels.
  std::vector<int> labels(cells.size());
  if (is_numeric(label_col)) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      (void)absl::SimpleAtod(cells[i][label_col], &v);
      labels[i] = v > 0.0 ? 1 : -1;
    }
  } else {
    std::set<std::string> values;
    for (const auto& row : cells) values.insert(row[label_col]);
    if (values.size() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, ": text label column must take exactly two "
                             "values, found ",
                       values.size()));
    }
    const std::string& positive = *values.rbegin();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      labels[i] = cells[i][label_col] == positive ? 1 : -1;
    }
  }

  // Feature layout: numeric columns take one slot, categorical columns one
  // slot per distinct value.
  struct Column {
    std::size_t source;
    bool numeric;
    std::map<std::string, int> categories;  // value -> offset
    int offset = 0;
  };
  std::vector<Column> columns;
  int d = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    Column col{c, is_numeric(c), {}, d};
    if (col.numeric) {
      d += 1;
    } else {
      for (const auto& row : cells) col.categories.emplace(row[c], 0);
      int k = 0;
      for (auto& [value, off] : col.categories) off = k++;
      d += k;
    }
    columns.push_back(std::move(col));
  }
  std::vector<double> dense(cells.size() * d, 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (const Column& col : columns) {
      if (col.numeric) {
        (void)absl::SimpleAtod(cells[i][col.source], &dense[i * d + col.offset]);
      } else {
        dense[i * d + col.offset + col.categories.at(cells[i][col.source])] =
            1.0;
      }
    }
  }
  for (const Column& col : columns) {
    if (col.numeric) ScaleColumn(dense, cells.size(), d, col.offset);
  }
  Dataset ds(std::move(name), d);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ds.Add(std::span<const double>(dense).subspan(i * d, d), labels[i]);
  }
  return ds;
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const std::string& label_column) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  return ParseCsv(*text, label_column, path);
}

absl::StatusOr<Dataset> LoadDataset(absl::string_view spec) {
  if (absl::ConsumePrefix(&spec, "syn:")) {
    absl::StatusOr<SyntheticSpec> s = ParseSyntheticSpec(spec);
    if (!s.ok()) return s.status();
    absl::StatusOr<SyntheticData> data = GenerateSynthetic(*s);
    if (!data.ok()) return data.status();
    return std::move(data->data);
  }
  const std::string path(spec);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return LoadCsv(path);
  }
  return LoadSparseText(path);
}

absl::Status WriteSparseText(const Dataset& ds, std::ostream& os) {
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << (ds.label(i) > 0 ? "+1" : "-1");
    const auto row = ds.row(i);
    for (int j = 0; j < ds.d(); ++j) {
      if (row[j] == 0.0) continue;
      auto res = std::to_chars(buf, buf + sizeof(buf), row[j]);
      os << ' ' << (j + 1) << ':' << absl::string_view(buf, res.ptr - buf);
    }
    os << '\n';
  }
  if (!os) return absl::DataLossError("write failed");
  return absl::OkStatus();
}

absl::StatusOr<std::vector<FoldSplit>> KFoldSplit(std::size_t n, int folds,
                                                  int repeats,
                                                  std::uint64_t seed) {
  if (folds < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("folds must be >= 2, got ", folds));
  }
  if (static_cast<std::size_t>(folds) > n) {
    return absl::InvalidArgumentError(
        absl::StrCat("folds (", folds, ") exceed examples (", n, ")"));
  }
  if (repeats < 1) {
    return absl::InvalidArgumentError("repeats must be >= 1");
  }
  std::vector<FoldSplit> out;
  for (int r = 0; r < repeats; ++r) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = MakeRng(seed, Stream::kFolds, {static_cast<std::uint64_t>(r)});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(perm[i - 1], perm[UniformIndex(rng, i)]);
    }
    for (int f = 0; f < folds; ++f) {
      const std::size_t begin = n * f / folds;
      const std::size_t end = n * (f + 1) / folds;
      FoldSplit split;
      split.repeat = r;
      split.fold = f;
      split.test.assign(perm.begin() + begin, perm.begin() + end);
      split.train.assign(perm.begin(), perm.begin() + begin);
      split.train.insert(split.train.end(), perm.begin() + end, perm.end());
      std::sort(split.test.begin(), split.test.end());
      std::sort(split.train.begin(), split.train.end());
      out.push_back(std::move(split));
    }
  }
  return out;
}

}  // namespace fedsel
