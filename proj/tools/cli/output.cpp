#include "output.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "typesize/errors.hpp"

namespace typesize::cli {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Report::Report(const std::string& command) { text_ = "typesize-report 1\ncommand=" + command + "\n"; }

void Report::add(const std::string& key, const std::string& value) { text_ += key + "=" + value + "\n"; }

void Report::row(const std::vector<std::pair<std::string, std::string>>& fields) {
  text_ += "row";
  for (const auto& [k, v] : fields) text_ += " " + k + "=" + v;
  text_ += "\n";
}

std::string fit_svg(const ThirdOrderFit& fit, const std::string& title) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  std::vector<double> xs, ys;
  for (const auto& p : fit.points) {
    xs.push_back(std::log2(static_cast<double>(p.n)));
    ys.push_back(p.y);
  }
  double x0 = *std::min_element(xs.begin(), xs.end()), x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = *std::min_element(ys.begin(), ys.end()), y1 = *std::max_element(ys.begin(), ys.end());
  for (double x : {x0, x1}) {
    const double y = fit.slope * x + fit.intercept;
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 - x0 < 1e-9) x1 = x0 + 1;
  const double pad = std::max(0.05 * (y1 - y0), 0.5);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s << "<text x=\"" << px(xs[i]) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fit.points[i].n
      << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = y0 + k * (y1 - y0) / 4;
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">n (log scale)</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\">n R - n H - sigma sqrt(n) Qinv(eps)</text>\n";
  s << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fit.slope * x0 + fit.intercept) << "\" x2=\"" << px(x1)
    << "\" y2=\"" << py(fit.slope * x1 + fit.intercept) << "\" stroke=\"#c03020\" stroke-width=\"1.5\"/>\n";
  s << "<polyline fill=\"none\" stroke=\"#2060c0\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? " " : "") << px(xs[i]) << "," << py(ys[i]);
  s << "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i]) << "\" r=\"3.5\" fill=\"#2060c0\"/>\n";
  }
  s << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 << "\" text-anchor=\"end\">slope = " << fmt(fit.slope)
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace typesize::cli
