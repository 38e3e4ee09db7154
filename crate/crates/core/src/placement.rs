//! Cache placement with disjoint caches inside each cluster.
//!
//! A cluster of `k` users stores the `k·h` most popular files, `h` per user;
//! only the file-to-user assignment is random.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::popularity::{ContentLibrary, FileId};
use crate::topology::Clustering;

#[derive(Debug, Clone)]
pub struct CacheAssignment {
    per_user: usize,
    caches: Vec<Vec<FileId>>,
    rho_user: Vec<f64>,
    rho_cluster: Vec<f64>,
    // owners[cluster][file index] for the top k·h files cached in that cluster
    owners: Vec<Vec<usize>>,
}

impl CacheAssignment {
    /// Files cached per user (`h`).
    pub fn per_user(&self) -> usize {
        self.per_user
    }

    pub fn cache(&self, user: usize) -> &[FileId] {
        &self.caches[user]
    }

    pub fn holds(&self, user: usize, file: FileId) -> bool {
        self.caches[user].contains(&file)
    }

    pub fn rho_user(&self, user: usize) -> f64 {
        self.rho_user[user]
    }

    pub fn rho_cluster(&self, cluster: usize) -> f64 {
        self.rho_cluster[cluster]
    }

    /// The unique in-cluster user caching `file`, if any.
    pub fn owner(&self, cluster: usize, file: FileId) -> Option<usize> {
        self.owners[cluster].get(file.index()).copied()
    }
}

/// Popularity mass of a cache.
pub fn rho_user(cache: &[FileId], library: &ContentLibrary) -> Result<f64> {
    cache.iter().try_fold(0.0, |acc, f| {
        if f.index() >= library.len() {
            Err(Error::invalid(format!(
                "file rank {} outside a library of {} files",
                f.rank(),
                library.len()
            )))
        } else {
            Ok(acc + library.popularity(*f))
        }
    })
}

/// Fills every user's cache with `h` files, disjoint within each cluster.
pub fn place_caches<R: Rng + ?Sized>(
    clustering: &Clustering,
    library: &ContentLibrary,
    h: usize,
    rng: &mut R,
) -> Result<CacheAssignment> {
    if h == 0 || h > library.len() {
        return Err(Error::invalid(format!(
            "cached files per user must be in 1..={}, got {h}",
            library.len()
        )));
    }
    let users = clustering.iter().map(|(_, m)| m.len()).sum();
    let mut caches = vec![Vec::new(); users];
    let mut rho_user_v = vec![0.0; users];
    let mut rho_cluster = Vec::with_capacity(clustering.num_clusters());
    let mut owners = Vec::with_capacity(clustering.num_clusters());

    for (cluster, members) in clustering.iter() {
        let k = members.len();
        if k * h > library.len() {
            return Err(Error::InfeasiblePlacement {
                cluster,
                users: k,
                per_user: h,
                library: library.len(),
            });
        }
        let mut files: Vec<FileId> = (0..(k * h) as u32).map(FileId).collect();
        files.shuffle(rng);
        let mut owner = vec![0usize; k * h];
        let mut mass = 0.0;
        for (slot, &user) in members.iter().enumerate() {
            let cache = files[slot * h..(slot + 1) * h].to_vec();
            for f in &cache {
                owner[f.index()] = user;
            }
            let rho = rho_user(&cache, library)?;
            rho_user_v[user] = rho;
            mass += rho;
            caches[user] = cache;
        }
        rho_cluster.push(mass);
        owners.push(owner);
    }
    Ok(CacheAssignment {
        per_user: h,
        caches,
        rho_user: rho_user_v,
        rho_cluster,
        owners,
    })
}
