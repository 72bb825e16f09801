// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace jointvid::plot {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static line chart written as PNG. Non-finite points are skipped.
void line_chart(const std::string& path, const std::string& title, const std::vector<Series>& series,
                const std::string& x_label = "step", const std::string& y_label = "loss");

struct BarGroup {
    std::string name;
    std::vector<double> values;  // one per category
};

/// Grouped bar chart written as PNG, one cluster per category.
void bar_chart(const std::string& path, const std::string& title,
               const std::vector<std::string>& categories, const std::vector<BarGroup>& groups);

}  // namespace jointvid::plot
