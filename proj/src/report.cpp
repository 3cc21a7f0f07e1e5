#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "image_io.hpp"

namespace unireg {

void write_loss_svg(const std::string& path, const std::vector<LossTerms>& history) {
    if (history.empty()) throw std::runtime_error("loss history is empty");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write SVG: " + path);

    const int width = 640, height = 400, margin = 50;
    double lo = 1e300, hi = -1e300;
    for (const LossTerms& t : history) {
        const double v = std::max(t.total(), 1e-12);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo * 10.0;
    const double llo = std::log10(lo), lhi = std::log10(hi);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">loss per epoch (log scale)</text>\n";
    const auto point = [&](size_t e) {
        const double x =
            margin + (width - 2.0 * margin) * (history.size() == 1 ? 0.5 : e / (history.size() - 1.0));
        const double v = std::log10(std::max(history[e].total(), 1e-12));
        const double y = height - margin - (height - 2.0 * margin) * (v - llo) / (lhi - llo);
        return std::pair{x, y};
    };
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (size_t e = 0; e < history.size(); ++e) {
        const auto [x, y] = point(e);
        out << x << "," << y << " ";
    }
    out << "\"/>\n";
    // one marker per epoch
    for (size_t e = 0; e < history.size(); ++e) {
        const auto [x, y] = point(e);
        out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"1.5\" fill=\"steelblue\"/>\n";
    }
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "</svg>\n";
}

ScalarField checkerboard(const ScalarField& a, const ScalarField& b, int block) {
    if (a.dim() != 2 || a.extents != b.extents)
        throw std::runtime_error("checkerboard expects two 2D fields with equal geometry");
    ScalarField out = a;
    const int h = a.extents[0], w = a.extents[1];
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (((y / block) + (x / block)) % 2 == 1)
                out.values[static_cast<long>(y) * w + x] = b.values[static_cast<long>(y) * w + x];
    return out;
}

void write_overlay_png(const std::string& path, const ScalarField& red, const ScalarField& green) {
    ScalarField blue(red.extents, 0.0);
    save_image_rgb8(path, red, green, blue);
}

ScalarField middle_slice(const ScalarField& field) {
    if (field.dim() == 2) return field;
    if (field.dim() != 3) throw std::runtime_error("middle_slice expects a 2D or 3D field");
    const int mid = field.extents[0] / 2;
    ScalarField out({field.extents[1], field.extents[2]});
    out.spacing = {field.spacing[1], field.spacing[2]};
    const long plane = static_cast<long>(field.extents[1]) * field.extents[2];
    std::copy_n(field.values.begin() + mid * plane, plane, out.values.begin());
    return out;
}

}  // namespace unireg
