#include "polsar/error.hpp"
#include "polsar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace polsar::io {

namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

std::string strip_comment(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) {
    line.erase(hash);
  }
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> words;
  for (std::string w; ss >> w;) {
    words.push_back(w);
  }
  return words;
}

std::string where(int line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename T>
T parse_number(std::string_view text, int line_no, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(where(line_no) + "invalid " + what + " '" + std::string(text) + "'");
  }
  return value;
}

// from_chars for double is missing from older libstdc++ releases.
template <>
double parse_number<double>(std::string_view text, int line_no, const char* what) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw DataError(where(line_no) + "invalid " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

ClassMapping parse_remap(std::istream& in) {
  ClassMapping mapping;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto line = strip_comment(raw);
    if (line.empty()) {
      continue;
    }
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      throw DataError(where(line_no) + "expected 'source -> target' or 'source -> drop'");
    }
    const auto lhs = strip_comment(line.substr(0, arrow));
    const auto rhs = strip_comment(line.substr(arrow + 2));
    const int source = parse_number<int>(lhs, line_no, "source class id");
    if (source < 1) {
      throw DataError(where(line_no) + "class ids must be >= 1");
    }
    if (mapping.contains(source)) {
      throw DataError(where(line_no) + "class " + std::to_string(source) + " mapped twice");
    }
    if (rhs == "drop") {
      mapping[source] = std::nullopt;
    } else {
      const int target = parse_number<int>(rhs, line_no, "target class id");
      if (target < 1) {
        throw DataError(where(line_no) + "class ids must be >= 1");
      }
      mapping[source] = target;
    }
  }
  return mapping;
}

ClassMapping read_remap(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_remap(in);
}

std::vector<Rgb> parse_palette(std::istream& in) {
  std::map<int, Rgb> entries;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto words = split_words(strip_comment(raw));
    if (words.empty()) {
      continue;
    }
    if (words.size() != 4) {
      throw DataError(where(line_no) + "expected 'id r g b'");
    }
    const int id = parse_number<int>(words[0], line_no, "class id");
    if (id < 0) {
      throw DataError(where(line_no) + "class id must be >= 0");
    }
    Rgb c{};
    for (std::size_t k = 0; k < 3; ++k) {
      const int v = parse_number<int>(words[k + 1], line_no, "colour component");
      if (v < 0 || v > 255) {
        throw DataError(where(line_no) + "colour components must lie in [0, 255]");
      }
      c[k] = static_cast<std::uint8_t>(v);
    }
    entries[id] = c;
  }
  if (entries.empty()) {
    return {};
  }
  std::vector<Rgb> palette(static_cast<std::size_t>(entries.rbegin()->first) + 1, Rgb{0, 0, 0});
  for (const auto& [id, c] : entries) {
    palette[static_cast<std::size_t>(id)] = c;
  }
  return palette;
}

std::vector<Rgb> read_palette(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_palette(in);
}

synth::SceneSpec parse_scene_spec(std::istream& in) {
  synth::SceneSpec spec;
  bool have_size = false;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto w = split_words(strip_comment(raw));
    if (w.empty()) {
      continue;
    }
    const auto& cmd = w[0];
    auto need = [&](std::size_t n) {
      if (w.size() != n + 1) {
        throw DataError(where(line_no) + "'" + cmd + "' takes " + std::to_string(n) +
                        " argument(s)");
      }
    };
    auto integer = [&](std::size_t i) { return parse_number<int>(w[i], line_no, "integer"); };
    auto real = [&](std::size_t i) { return parse_number<double>(w[i], line_no, "number"); };

    if (cmd == "size") {
      need(2);
      spec.width = integer(1);
      spec.height = integer(2);
      have_size = true;
    } else if (cmd == "looks") {
      need(1);
      spec.looks = integer(1);
    } else if (cmd == "seed") {
      need(1);
      spec.seed = parse_number<std::uint64_t>(w[1], line_no, "seed");
    } else if (cmd == "background") {
      need(1);
      spec.background_class = integer(1);
    } else if (cmd == "class") {
      need(10);
      Hermitian3 m;
      m.diag = {real(2), real(3), real(4)};
      m.upper = {cplx{real(5), real(6)}, cplx{real(7), real(8)}, cplx{real(9), real(10)}};
      spec.class_models[integer(1)] = m;
    } else if (cmd == "rect") {
      need(5);
      spec.regions.push_back({synth::Rect{integer(2), integer(3), integer(4), integer(5)}, integer(1)});
    } else if (cmd == "disk") {
      need(4);
      spec.regions.push_back({synth::Disk{real(2), real(3), real(4)}, integer(1)});
    } else {
      throw DataError(where(line_no) + "unknown directive '" + cmd + "'");
    }
  }
  if (!have_size) {
    throw DataError("scene description has no 'size' directive");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid scene description: ") + e.what());
  }
  return spec;
}

synth::SceneSpec read_scene_spec(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_scene_spec(in);
}

std::vector<cnn::ConvLayerSpec> parse_cnn_layers(const std::string& text) {
  std::vector<cnn::ConvLayerSpec> layers;
  std::istringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = strip_comment(item);
    cnn::ConvLayerSpec l;
    char x1 = 0;
    char x2 = 0;
    char s = 0;
    char x3 = 0;
    int extra = 0;
    std::istringstream is(item);
    is >> l.neurons >> x1 >> l.kx >> x2 >> l.ky >> s >> l.ssx;
    if (!is || x1 != 'x' || x2 != 'x' || s != 's') {
      throw std::invalid_argument("invalid CNN layer '" + item + "' (expected e.g. 20x3x3s2)");
    }
    l.ssy = l.ssx;
    if (is >> x3) {
      if (x3 != 'x' || !(is >> extra)) {
        throw std::invalid_argument("invalid CNN layer '" + item + "'");
      }
      l.ssy = extra;
    }
    if (is >> x3) {
      throw std::invalid_argument("trailing characters in CNN layer '" + item + "'");
    }
    if (l.neurons < 1 || l.kx < 1 || l.ky < 1 || l.ssx < 1 || l.ssy < 1) {
      throw std::invalid_argument("CNN layer sizes must be positive in '" + item + "'");
    }
    layers.push_back(l);
  }
  if (layers.empty()) {
    throw std::invalid_argument("at least one CNN layer is required");
  }
  return layers;
}

std::vector<int> parse_mlp_layers(const std::string& text) {
  std::vector<int> layers;
  if (strip_comment(text).empty()) {
    return layers;
  }
  std::istringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = strip_comment(item);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (ec != std::errc{} || ptr != item.data() + item.size() || n < 1) {
      throw std::invalid_argument("invalid MLP layer size '" + item + "'");
    }
    layers.push_back(n);
  }
  return layers;
}

std::string format_cnn_layers(const std::vector<cnn::ConvLayerSpec>& layers) {
  std::string out;
  for (const auto& l : layers) {
    if (!out.empty()) {
      out += ',';
    }
    out += std::to_string(l.neurons) + "x" + std::to_string(l.kx) + "x" + std::to_string(l.ky) +
           "s" + std::to_string(l.ssx);
    if (l.ssy != l.ssx) {
      out += "x" + std::to_string(l.ssy);
    }
  }
  return out;
}

void write_samples_csv(const std::vector<SamplePoint>& points, std::ostream& out) {
  out << "x,y,class\n";
  for (const auto& p : points) {
    out << p.x << ',' << p.y << ',' << p.class_id << '\n';
  }
}

std::vector<SamplePoint> parse_samples_csv(std::istream& in) {
  std::vector<SamplePoint> points;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto line = strip_comment(raw);
    if (line.empty() || (line_no == 1 && line.starts_with("x,"))) {
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
      fields.push_back(strip_comment(f));
    }
    if (fields.size() != 3) {
      throw DataError(where(line_no) + "expected 'x,y,class'");
    }
    points.push_back({parse_number<int>(fields[0], line_no, "x"),
                      parse_number<int>(fields[1], line_no, "y"),
                      parse_number<int>(fields[2], line_no, "class")});
  }
  return points;
}

std::vector<SamplePoint> read_samples_csv(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_samples_csv(in);
}

namespace {

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string full(const std::optional<double>& v) { return v ? full(*v) : "NA"; }

std::string class_name(const ConfusionMatrix& cm, int k) {
  const auto& names = cm.class_names();
  return static_cast<std::size_t>(k) < names.size() ? names[static_cast<std::size_t>(k)]
                                                    : "class" + std::to_string(k + 1);
}

}  // namespace

void write_history_csv(const cnn::TrainHistory& history, std::ostream& out) {
  out << "epoch,train_mse,learning_rate,next_learning_rate,validation_mse,validation_accuracy\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << full(e.train_mse) << ',' << full(e.learning_rate) << ','
        << full(e.next_learning_rate) << ',' << full(e.validation_mse) << ','
        << full(e.validation_accuracy) << '\n';
  }
}

void write_metrics_csv(const ConfusionMatrix& cm, const AccuracyStats& stats, std::ostream& out) {
  const int k = cm.classes();
  out << "truth";
  for (int c = 0; c < k; ++c) {
    out << ',' << class_name(cm, c);
  }
  out << ",rejected,total\n";
  for (int t = 0; t < k; ++t) {
    out << class_name(cm, t);
    for (int p = 0; p < k; ++p) {
      out << ',' << cm.count(t, p);
    }
    out << ',' << cm.rejected(t) << ',' << cm.row_sum(t) << '\n';
  }
  out << "total";
  for (int p = 0; p < k; ++p) {
    out << ',' << cm.col_sum(p);
  }
  std::uint64_t rejected = 0;
  for (int t = 0; t < k; ++t) {
    rejected += cm.rejected(t);
  }
  out << ',' << rejected << ',' << cm.total() << '\n';
  out << "overall," << full(stats.overall) << '\n';
  out << "producer";
  for (const auto& v : stats.producer) {
    out << ',' << full(v);
  }
  out << "\nuser";
  for (const auto& v : stats.user) {
    out << ',' << full(v);
  }
  out << '\n';
}

void print_metrics(const ConfusionMatrix& cm, const AccuracyStats& stats, std::ostream& out) {
  const int k = cm.classes();
  std::size_t width = 10;
  for (int c = 0; c < k; ++c) {
    width = std::max(width, class_name(cm, c).size() + 2);
  }
  const auto w = static_cast<int>(width);
  out << std::left << std::setw(w) << "truth\\pred" << std::right;
  for (int c = 0; c < k; ++c) {
    out << std::setw(w) << class_name(cm, c);
  }
  out << std::setw(w) << "rejected" << std::setw(w) << "producer" << '\n';
  for (int t = 0; t < k; ++t) {
    out << std::left << std::setw(w) << class_name(cm, t) << std::right;
    for (int p = 0; p < k; ++p) {
      out << std::setw(w) << cm.count(t, p);
    }
    out << std::setw(w) << cm.rejected(t) << std::setw(w)
        << format_percent(stats.producer[static_cast<std::size_t>(t)]) << '\n';
  }
  out << std::left << std::setw(w) << "user" << std::right;
  for (int p = 0; p < k; ++p) {
    out << std::setw(w) << format_percent(stats.user[static_cast<std::size_t>(p)]);
  }
  out << '\n';
  out << "overall accuracy: " << format_percent(stats.overall) << " (" << stats.correct << " / "
      << stats.total << ")\n";
}

}  // namespace polsar::io
