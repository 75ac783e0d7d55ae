// -*- mode: c++ -*-

#ifndef DOP_POSTERIOR_HPP
#define DOP_POSTERIOR_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dop
{
  // g(s,t,L) over 1-based inclusive spans, aggregated to exterior labels.
  // Value is double on the parser path and Rational on the oracle path.
  template <typename Value>
  class PosteriorTable
  {
  public:
    PosteriorTable() = default;

    PosteriorTable(std::size_t length, std::vector<std::string> labels)
      : length_(length), labels_(std::move(labels))
    {
      std::sort(labels_.begin(), labels_.end());
      labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
      values_.assign(length_ * length_ * labels_.size(), Value(0));
    }

    std::size_t length() const { return length_; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<std::size_t> label_index(const std::string& label) const
    {
      auto iter = std::lower_bound(labels_.begin(), labels_.end(), label);
      if (iter == labels_.end() || *iter != label)
        return std::nullopt;
      return static_cast<std::size_t>(iter - labels_.begin());
    }

    Value& at(std::size_t s, std::size_t t, std::size_t label) { return values_[offset(s, t) + label]; }
    const Value& at(std::size_t s, std::size_t t, std::size_t label) const { return values_[offset(s, t) + label]; }

    Value get(std::size_t s, std::size_t t, const std::string& label) const
    {
      const auto index = label_index(label);
      return index ? at(s, t, *index) : Value(0);
    }

    void add(std::size_t s, std::size_t t, const std::string& label, const Value& value)
    {
      const auto index = label_index(label);
      if (index)
        at(s, t, *index) += value;
    }

  private:
    std::size_t offset(std::size_t s, std::size_t t) const
    {
      return ((s - 1) * length_ + (t - 1)) * labels_.size();
    }

    std::size_t              length_ = 0;
    std::vector<std::string> labels_;
    std::vector<Value>       values_;
  };
}

#endif
