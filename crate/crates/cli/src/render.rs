//! Static SVG spacetime diagrams: time upwards, space to the right.

use std::fmt::Write;

use causal_core::geometry::{
    find_probe_route, separating_cauchy_surface, to_f64, CauchyGraph, Diamond, Point, Rational, Worldline,
};

use crate::scenario::{Region, Resolved};

/// SVG user units per unit of spacetime.
const SCALE: f64 = 100.0;
const MARGIN: f64 = 0.1;
const WIDTH_PX: f64 = 800.0;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Bounds {
    t0: f64,
    t1: f64,
    x0: f64,
    x1: f64,
}

impl Bounds {
    fn fit(points: &[(f64, f64)]) -> Self {
        if points.is_empty() {
            return Self { t0: -1.0, t1: 1.0, x0: -1.0, x1: 1.0 };
        }
        let (mut b, mut first) = (Self { t0: 0.0, t1: 0.0, x0: 0.0, x1: 0.0 }, true);
        for &(t, x) in points {
            if first {
                b = Self { t0: t, t1: t, x0: x, x1: x };
                first = false;
            }
            b.t0 = b.t0.min(t);
            b.t1 = b.t1.max(t);
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
        }
        if b.t1 - b.t0 < 1.0 {
            b.t0 -= 0.5;
            b.t1 += 0.5;
        }
        if b.x1 - b.x0 < 1.0 {
            b.x0 -= 0.5;
            b.x1 += 0.5;
        }
        let (dt, dx) = ((b.t1 - b.t0) * MARGIN, (b.x1 - b.x0) * MARGIN);
        Self { t0: b.t0 - dt, t1: b.t1 + dt, x0: b.x0 - dx, x1: b.x1 + dx }
    }

    fn span(&self) -> f64 {
        (self.t1 - self.t0) + (self.x1 - self.x0)
    }
}

fn num(v: f64) -> String {
    let s = format!("{:.3}", v);
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn xy(t: f64, x: f64) -> String {
    format!("{},{}", num(x * SCALE), num(-t * SCALE))
}

fn pt(p: &Point) -> (f64, f64) {
    (to_f64(&p.t), to_f64(&p.x))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn diamond_points(d: &Diamond) -> Vec<(f64, f64)> {
    let (l, r) = d.corners();
    vec![pt(&d.bottom), pt(&r), pt(&d.top), pt(&l)]
}

/// The curve sampled at its vertices and at the two time limits.
fn worldline_points(w: &Worldline, b: &Bounds) -> Vec<(f64, f64)> {
    let at = |t: f64| (t, to_f64(&w.x_at(&rational(t))));
    let mut pts = vec![at(b.t0)];
    pts.extend(w.vertices().iter().map(pt).filter(|(t, _)| *t > b.t0 && *t < b.t1));
    pts.push(at(b.t1));
    pts
}

fn polyline(out: &mut String, class: &str, pts: &[(f64, f64)]) {
    let coords: Vec<String> = pts.iter().map(|&(t, x)| xy(t, x)).collect();
    writeln!(out, r#"  <polyline class="{class}" points="{}"/>"#, coords.join(" ")).unwrap();
}

fn label(out: &mut String, class: &str, (t, x): (f64, f64), text: &str) {
    writeln!(
        out,
        r#"  <text class="{class}" x="{}" y="{}">{}</text>"#,
        num(x * SCALE + 6.0),
        num(-t * SCALE - 6.0),
        escape(text)
    )
    .unwrap();
}

struct Scene {
    worldlines: Vec<(String, Worldline, &'static str)>,
    diamonds: Vec<(String, Diamond, &'static str)>,
    intervals: Vec<(String, (f64, f64), (f64, f64))>,
    events: Vec<(f64, f64)>,
    routes: Vec<Worldline>,
    surfaces: Vec<CauchyGraph>,
}

fn scene(res: &Resolved) -> Scene {
    let zones: Vec<&Diamond> = res.fv.values().map(|m| &m.zone).collect();
    let mut s = Scene {
        worldlines: Vec::new(),
        diamonds: Vec::new(),
        intervals: Vec::new(),
        events: Vec::new(),
        routes: Vec::new(),
        surfaces: Vec::new(),
    };
    for sys in res.net.systems() {
        s.worldlines.push((sys.label.clone(), sys.worldline.clone(), "worldline"));
    }
    for (name, m) in &res.fv {
        for p in &m.probe {
            s.worldlines.push((format!("{} ({name})", p.label), p.worldline.clone(), "worldline probe"));
        }
        s.events.extend(m.theta.interactions().iter().map(|i| pt(&i.event)));
    }
    for (name, r) in &res.regions {
        match r {
            Region::Diamond(d) => {
                let class = if zones.contains(&d) { "region zone" } else { "region" };
                s.diamonds.push((name.clone(), d.clone(), class));
            }
            Region::Interval(iv) => {
                let t = to_f64(&iv.t);
                s.intervals.push((name.clone(), (t, to_f64(&iv.x_lo)), (t, to_f64(&iv.x_hi))));
            }
        }
    }
    if let Some(g) = &res.scenario.commands.check_geometry {
        for r in &g.routes {
            let found = match (
                res.diamond("", &r.o_a),
                res.diamond("", &r.o_c),
                res.system_worldline("", &r.gamma_a),
                res.system_worldline("", &r.gamma_c),
            ) {
                (Ok(a), Ok(c), Ok(ga), Ok(gc)) => find_probe_route(a, c, ga, gc),
                _ => None,
            };
            if let Some(route) = found {
                s.events.push(pt(&route.entry));
                s.events.push(pt(&route.exit));
                s.routes.push(route.route);
            }
        }
        for [k, l] in &g.cauchy {
            if let (Ok(k), Ok(l)) = (res.diamond("", k), res.diamond("", l)) {
                if let Ok(graph) = separating_cauchy_surface(k, l) {
                    s.surfaces.push(graph);
                }
            }
        }
    }
    s
}

fn rational(v: f64) -> Rational {
    Rational::from_float(v).expect("bounds are finite")
}

fn graph_points(g: &CauchyGraph, b: &Bounds) -> Vec<(f64, f64)> {
    let at = |x: f64| (to_f64(&g.eval(&rational(x))), x);
    let mut pts = vec![at(b.x0)];
    pts.extend(g.breakpoints.iter().map(pt).filter(|(_, x)| *x > b.x0 && *x < b.x1));
    pts.push(at(b.x1));
    pts
}

/// Renders the scenario's geometry. Identical scenarios give byte-identical documents.
pub fn render(res: Option<&Resolved>) -> String {
    let s = res.map(scene);
    let mut pts = Vec::new();
    if let Some(s) = &s {
        for (_, w, _) in &s.worldlines {
            pts.extend(w.vertices().iter().map(pt));
        }
        for (_, d, _) in &s.diamonds {
            pts.extend(diamond_points(d));
        }
        for (_, a, b) in &s.intervals {
            pts.extend([*a, *b]);
        }
        pts.extend(&s.events);
        for r in &s.routes {
            pts.extend(r.vertices().iter().map(pt));
        }
        for g in &s.surfaces {
            pts.extend(g.breakpoints.iter().map(pt));
        }
    }
    let b = Bounds::fit(&pts);
    let (vx, vy, vw, vh) = (b.x0 * SCALE, -b.t1 * SCALE, (b.x1 - b.x0) * SCALE, (b.t1 - b.t0) * SCALE);
    let height_px = WIDTH_PX * vh / vw;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        num(WIDTH_PX),
        num(height_px),
        num(vx),
        num(vy),
        num(vw),
        num(vh)
    )
    .unwrap();
    out.push_str(
        "  <style>\n\
         \x20   .axis { stroke: #999; stroke-width: 1; }\n\
         \x20   .worldline { fill: none; stroke: #222; stroke-width: 2; }\n\
         \x20   .probe { stroke: #1f5fa8; stroke-dasharray: 8 4; }\n\
         \x20   .route { fill: none; stroke: #1f5fa8; stroke-width: 2; stroke-dasharray: 3 3; }\n\
         \x20   .region { fill: #e8a33d; fill-opacity: 0.35; stroke: #b86e00; stroke-width: 1.5; }\n\
         \x20   .zone { fill: #6aa6e0; stroke: #1f5fa8; }\n\
         \x20   .interval { stroke: #7a3db8; stroke-width: 3; }\n\
         \x20   .cone { stroke: #b86e00; stroke-width: 1; stroke-dasharray: 2 4; }\n\
         \x20   .cauchy { fill: none; stroke: #3a9a5b; stroke-width: 1.5; }\n\
         \x20   .event { fill: #c0392b; }\n\
         \x20   text { font: 14px sans-serif; fill: #222; }\n\
         \x20 </style>\n",
    );
    writeln!(
        out,
        r#"  <clipPath id="frame"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
        num(vx),
        num(vy),
        num(vw),
        num(vh)
    )
    .unwrap();
    out.push_str("  <g clip-path=\"url(#frame)\">\n");
    if b.x0 < 0.0 && b.x1 > 0.0 {
        writeln!(out, r#"  <line class="axis" x1="0.000" y1="{}" x2="0.000" y2="{}"/>"#, num(-b.t1 * SCALE), num(-b.t0 * SCALE))
            .unwrap();
    }
    if b.t0 < 0.0 && b.t1 > 0.0 {
        writeln!(out, r#"  <line class="axis" x1="{}" y1="0.000" x2="{}" y2="0.000"/>"#, num(b.x0 * SCALE), num(b.x1 * SCALE))
            .unwrap();
    }
    label(&mut out, "axis-label", (b.t1 - (b.t1 - b.t0) * 0.06, 0.0_f64.clamp(b.x0, b.x1)), "t");
    label(&mut out, "axis-label", (0.0_f64.clamp(b.t0, b.t1), b.x1 - (b.x1 - b.x0) * 0.04), "x");

    if let Some(s) = &s {
        let reach = b.span();
        for (_, d, _) in &s.diamonds {
            // Null boundary of the causal future: rays through the left and right corners.
            let (l, r) = d.corners();
            let ((lt, lx), (rt, rx)) = (pt(&l), pt(&r));
            polyline(&mut out, "cone", &[(lt, lx), (lt + reach, lx - reach)]);
            polyline(&mut out, "cone", &[(rt, rx), (rt + reach, rx + reach)]);
        }
        for (name, d, class) in &s.diamonds {
            let coords: Vec<String> = diamond_points(d).iter().map(|&(t, x)| xy(t, x)).collect();
            writeln!(out, r#"  <polygon class="{class}" points="{}"/>"#, coords.join(" ")).unwrap();
            label(&mut out, "region-label", pt(&d.top), name);
        }
        for (name, a, z) in &s.intervals {
            writeln!(
                out,
                r#"  <line class="interval" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                num(a.1 * SCALE),
                num(-a.0 * SCALE),
                num(z.1 * SCALE),
                num(-z.0 * SCALE)
            )
            .unwrap();
            label(&mut out, "interval-label", *z, name);
        }
        for g in &s.surfaces {
            polyline(&mut out, "cauchy", &graph_points(g, &b));
        }
        for (name, w, class) in &s.worldlines {
            let pts = worldline_points(w, &b);
            polyline(&mut out, class, &pts);
            label(&mut out, "worldline-label", pts[0], name);
        }
        for r in &s.routes {
            polyline(&mut out, "route", &worldline_points(r, &b));
        }
        for &(t, x) in &s.events {
            writeln!(out, r#"  <circle class="event" cx="{}" cy="{}" r="5"/>"#, num(x * SCALE), num(-t * SCALE)).unwrap();
        }
    }
    out.push_str("  </g>\n</svg>\n");
    out
}
