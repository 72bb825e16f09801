// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "common/error.hpp"

namespace jointvid::plot {

namespace {

constexpr int kWidth = 800, kHeight = 480;
constexpr int kLeft = 80, kRight = 170, kTop = 40, kBottom = 70;

const cv::Scalar kInk(40, 40, 40);
const cv::Scalar kGrid(225, 225, 225);

cv::Scalar palette(std::size_t i) {
    static const cv::Scalar colors[] = {
        {180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214},
        {189, 103, 148}, {75, 86, 140}, {194, 119, 227}, {127, 127, 127},
    };
    return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

std::string format_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void text(cv::Mat& img, const std::string& s, cv::Point at, double scale = 0.45) {
    cv::putText(img, s, at, cv::FONT_HERSHEY_SIMPLEX, scale, kInk, 1, cv::LINE_AA);
}

struct Frame {
    double x0, x1, y0, y1;
    cv::Point map(double x, double y) const {
        const double px = kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
        const double py = kTop + (1.0 - (y - y0) / (y1 - y0)) * (kHeight - kTop - kBottom);
        return {int(std::lround(px)), int(std::lround(py))};
    }
};

void widen(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

void axes(cv::Mat& img, const Frame& f, const std::string& title, const std::string& x_label,
          const std::string& y_label, bool x_ticks) {
    for (int k = 0; k <= 4; ++k) {
        const double y = f.y0 + (f.y1 - f.y0) * k / 4.0;
        auto a = f.map(f.x0, y), b = f.map(f.x1, y);
        cv::line(img, a, b, kGrid, 1);
        text(img, format_tick(y), {8, a.y + 4}, 0.4);
        if (x_ticks) {
            const double x = f.x0 + (f.x1 - f.x0) * k / 4.0;
            auto p = f.map(x, f.y0);
            text(img, format_tick(x), {p.x - 12, kHeight - kBottom + 18}, 0.4);
        }
    }
    cv::rectangle(img, {kLeft, kTop}, {kWidth - kRight, kHeight - kBottom}, kInk, 1);
    text(img, title, {kLeft, 26}, 0.6);
    text(img, x_label, {(kWidth - kRight + kLeft) / 2 - 20, kHeight - 20});
    text(img, y_label, {8, kTop - 12}, 0.4);
}

void legend(cv::Mat& img, const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        const int y = kTop + 10 + int(i) * 22;
        cv::rectangle(img, {kWidth - kRight + 12, y - 8}, {kWidth - kRight + 26, y + 4}, palette(i), cv::FILLED);
        text(img, names[i].substr(0, 18), {kWidth - kRight + 32, y + 4}, 0.42);
    }
}

void save(const std::string& path, const cv::Mat& img) {
    if (!cv::imwrite(path, img)) fail(ErrorKind::Io, "cannot write plot " + path);
}

}  // namespace

void line_chart(const std::string& path, const std::string& title, const std::vector<Series>& series,
                const std::string& x_label, const std::string& y_label) {
    Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : series) {
        require(s.x.size() == s.y.size(), "series x and y differ in length");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            f.x0 = std::min(f.x0, s.x[i]);
            f.x1 = std::max(f.x1, s.x[i]);
            f.y0 = std::min(f.y0, s.y[i]);
            f.y1 = std::max(f.y1, s.y[i]);
        }
    }
    if (!std::isfinite(f.x0)) f = {0, 1, 0, 1};
    widen(f.x0, f.x1);
    widen(f.y0, f.y1);

    cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    axes(img, f, title, x_label, y_label, true);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        names.push_back(s.name);
        std::vector<cv::Point> pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) pts.push_back(f.map(s.x[i], s.y[i]));
        }
        if (pts.size() == 1) cv::circle(img, pts[0], 3, palette(k), cv::FILLED);
        if (pts.size() > 1) cv::polylines(img, pts, false, palette(k), 2, cv::LINE_AA);
    }
    legend(img, names);
    save(path, img);
}

void bar_chart(const std::string& path, const std::string& title,
               const std::vector<std::string>& categories, const std::vector<BarGroup>& groups) {
    double hi = 0.0, lo = 0.0;
    for (const auto& g : groups) {
        require(g.values.size() == categories.size(), "bar group size differs from categories");
        for (double v : g.values) {
            if (!std::isfinite(v)) continue;
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
    }
    Frame f{0.0, double(std::max<std::size_t>(categories.size(), 1)), lo, hi};
    widen(f.y0, f.y1);

    cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    axes(img, f, title, "", "", false);
    const double slot = 0.8 / double(std::max<std::size_t>(groups.size(), 1));
    std::vector<std::string> names;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        names.push_back(groups[g].name);
        for (std::size_t c = 0; c < categories.size(); ++c) {
            const double v = groups[g].values[c];
            if (!std::isfinite(v)) continue;
            const double x = double(c) + 0.1 + slot * double(g);
            cv::rectangle(img, f.map(x, 0.0), f.map(x + slot, v), palette(g), cv::FILLED);
        }
    }
    for (std::size_t c = 0; c < categories.size(); ++c) {
        auto p = f.map(double(c) + 0.5, f.y0);
        cv::Mat label(16, 150, CV_8UC3, cv::Scalar(255, 255, 255));
        std::string name = categories[c].substr(0, 14);
        if (categories.size() <= 6) {
            text(img, name, {p.x - 4 * int(name.size()), p.y + 18}, 0.4);
        } else {
            // Rotated labels for dense category axes.
            text(label, name, {0, 12}, 0.35);
            cv::Mat rotated;
            cv::rotate(label, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
            const int h = std::min(rotated.rows, kBottom - 4);
            const int x = std::clamp(p.x - 8, 0, kWidth - rotated.cols);
            rotated(cv::Rect(0, rotated.rows - h, rotated.cols, h)).copyTo(img(cv::Rect(x, p.y + 2, rotated.cols, h)));
        }
    }
    legend(img, names);
    save(path, img);
}

}  // namespace jointvid::plot
