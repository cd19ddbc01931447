#include "objclass/ca.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <string>
#include <vector>

namespace objclass {

void CaRule::validate() const {
  if (majority_threshold < 1 || majority_threshold > 8) {
    throw std::invalid_argument("CA majority_threshold must be in [1, 8]");
  }
  if (!(confidence_ceiling >= 0.0 && confidence_ceiling <= 1.0)) {
    throw std::invalid_argument("CA confidence_ceiling must be in [0, 1]");
  }
}

CaRule parse_ca_rule(std::string_view text) {
  std::array<std::string_view, 3> parts;
  std::size_t start = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto comma = text.find(',', start);
    if ((k < 2) == (comma == std::string_view::npos)) {
      throw std::invalid_argument("CA rule must be 'threshold,ceiling,steps', got '" + std::string(text) + "'");
    }
    parts[k] = text.substr(start, k < 2 ? comma - start : std::string_view::npos);
    start = comma + 1;
  }
  CaRule rule;
  auto parse = [&](std::string_view s, auto& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw std::invalid_argument("CA rule: bad field '" + std::string(s) + "'");
    }
  };
  parse(parts[0], rule.majority_threshold);
  parse(parts[1], rule.confidence_ceiling);
  parse(parts[2], rule.steps);
  rule.validate();
  return rule;
}

CaStepResult ca_step(const LabelMap& labels, const UnaryField* unary, const CaRule& rule) {
  rule.validate();
  const std::size_t w = labels.width();
  const std::size_t h = labels.height();
  if (unary && (unary->width != w || unary->height != h)) {
    throw std::invalid_argument("CA: label map and unary field have different shapes");
  }
  CaStepResult out{labels, 0};
  std::array<ClassId, 8> seen{};
  std::array<int, 8> count{};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const ClassId current = labels.at(x, y);
      const double confidence = unary && current != kUnclassified ? unary->probability(y * w + x, current) : 0.0;
      if (confidence >= rule.confidence_ceiling) continue;
      std::size_t distinct = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const auto nx = static_cast<std::ptrdiff_t>(x) + dx;
          const auto ny = static_cast<std::ptrdiff_t>(y) + dy;
          if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(w) || ny >= static_cast<std::ptrdiff_t>(h)) continue;
          const ClassId l = labels.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
          if (l == kUnclassified || l == current) continue;
          std::size_t k = 0;
          while (k < distinct && seen[k] != l) ++k;
          if (k == distinct) {
            seen[distinct] = l;
            count[distinct] = 0;
            ++distinct;
          }
          ++count[k];
        }
      }
      ClassId winner = kUnclassified;
      int best = 0;
      for (std::size_t k = 0; k < distinct; ++k) {
        if (count[k] < rule.majority_threshold) continue;
        if (count[k] > best || (count[k] == best && seen[k] < winner)) {
          best = count[k];
          winner = seen[k];
        }
      }
      if (winner != kUnclassified) {
        out.labels.at(x, y) = winner;
        ++out.flips;
      }
    }
  }
  return out;
}

LabelMap ca_run(const LabelMap& labels, const UnaryField* unary, const CaRule& rule) {
  rule.validate();
  LabelMap current = labels;
  for (std::size_t s = 0; s < rule.steps; ++s) {
    auto step = ca_step(current, unary, rule);
    current = std::move(step.labels);
    if (step.flips == 0) break;
  }
  return current;
}

}  // namespace objclass
