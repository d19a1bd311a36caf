//! Event detectors evaluated on single loop configurations.

use loopon::loopcore::{decompose, interior_faces};
use loopon::{face_distance, FaceCoord, Loop, LoopConfig, Region};

fn bordered_coords(region: &Region, l: &Loop) -> Vec<FaceCoord> {
    l.bordered_faces(region).into_iter().map(|d| region.dual_vertex(d)).collect()
}

/// A loop of diameter at least `min_diam` surrounding `f`.
pub fn surrounding_loop(region: &Region, omega: &LoopConfig, f: FaceCoord, min_diam: u32) -> bool {
    loopon::isingfk::has_surrounding_loop(region, omega, f, min_diam)
}

/// A loop surrounding every face of `Λ_r(f)`.
pub fn loop_surrounding_ball(region: &Region, omega: &LoopConfig, f: FaceCoord, r: u32) -> bool {
    let ball: Vec<FaceCoord> = region.ball_faces(f, r).into_iter().map(|i| region.face(i)).collect();
    decompose(region, omega)
        .iter()
        .any(|l| ball.iter().all(|&g| l.surrounds(region, g).unwrap_or(false)))
}

/// `C_{r,R}(f)`: a loop bordering a face of `Λ_r(f)` and a face outside `Λ_R(f)`.
pub fn crossing(region: &Region, loops: &[Loop], f: FaceCoord, r: u32, big_r: u32) -> bool {
    loops.iter().any(|l| {
        let d: Vec<u32> = bordered_coords(region, l).into_iter().map(|g| face_distance(f, g)).collect();
        d.iter().any(|&v| v <= r) && d.iter().any(|&v| v > big_r)
    })
}

/// `S_{r,R}(f)`: a loop surrounding `f` all of whose bordered faces lie in
/// `Λ_R(f) ∖ Λ_r(f)`. Empty when `r ≥ R`.
pub fn annulus_surrounding(region: &Region, loops: &[Loop], f: FaceCoord, r: u32, big_r: u32) -> bool {
    loops.iter().any(|l| {
        bordered_coords(region, l).into_iter().all(|g| {
            let d = face_distance(f, g);
            d > r && d <= big_r
        }) && l.surrounds(region, f).unwrap_or(false)
    })
}

/// `𝓛(f)`: length of the longest loop bordering `f`, 0 if none.
pub fn longest_bordering(region: &Region, loops: &[Loop], f: usize) -> usize {
    loops.iter().filter(|l| l.borders_face(region, f)).map(Loop::len).max().unwrap_or(0)
}

/// The outermost loop surrounding `f` with the number of faces it
/// surrounds; `None` if no loop surrounds `f`.
pub fn outermost_surrounding(region: &Region, loops: &[Loop], f: FaceCoord) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, l) in loops.iter().enumerate() {
        if !l.surrounds(region, f).unwrap_or(false) {
            continue;
        }
        let inside = interior_faces(region, &l.edge_set(region)).ok()?;
        let v = inside.iter().filter(|&&b| b).count();
        // nested loops: the outermost one surrounds the most faces
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best
}

/// `𝒱(f)`: faces surrounded by the outermost loop surrounding `f`.
pub fn outermost_volume(region: &Region, loops: &[Loop], f: FaceCoord) -> usize {
    outermost_surrounding(region, loops, f).map_or(0, |(_, v)| v)
}

pub fn has_noncontractible(region: &Region, omega: &LoopConfig) -> bool {
    decompose(region, omega).iter().any(|l| !l.is_contractible(region).unwrap_or(true))
}

/// Faces of `Λ_{outer}(0) ∖ Λ_{inner}(0)` in `region`.
pub fn annulus_faces(region: &Region, inner: u32, outer: u32) -> Vec<usize> {
    (0..region.face_count())
        .filter(|&i| {
            let d = face_distance(FaceCoord::ORIGIN, region.face(i));
            d > inner && d <= outer
        })
        .collect()
}
